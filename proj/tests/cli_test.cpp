#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "cli.hpp"
#include "support.hpp"

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome fsj_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "fsj");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = fsj::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string corpus(const char* name) { return (fsj::test::corpus_dir() / name).string(); }

std::string write_temp(const std::string& name, const std::string& text) {
    auto path = std::filesystem::temp_directory_path() / ("fsj-cli-" + name);
    std::ofstream(path) << text;
    return path.string();
}

// Sets an environment variable for the lifetime of the guard.
class EnvGuard {
public:
    EnvGuard(const char* name, const char* value) : name_(name) { ::setenv(name, value, 1); }
    ~EnvGuard() { ::unsetenv(name_); }
    EnvGuard(const EnvGuard&) = delete;
    EnvGuard& operator=(const EnvGuard&) = delete;

private:
    const char* name_;
};

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_SUITE("fsj check") {
    TEST_CASE("well-typed file") {
        Outcome o = fsj_cli({"check", corpus("peano_pull.fsj")});
        CHECK(o.code == 0);
        CHECK(contains(o.out, "ok (main : Nat)"));
        CHECK(o.err.empty());
    }

    TEST_CASE("composite reassignment is a type error") {
        Outcome o = fsj_cli({"check", corpus("composite_assign.fsj")});
        CHECK(o.code == 1);
        CHECK(contains(o.err, "AssignToComposite"));
        CHECK(contains(o.err, "composite_assign.fsj:"));
    }

    TEST_CASE("missing file") {
        Outcome o = fsj_cli({"check", corpus("does_not_exist.fsj")});
        CHECK(o.code == 2);
        CHECK(contains(o.err, "cannot read"));
    }

    TEST_CASE("syntax error reports line and column") {
        Outcome o = fsj_cli({"check", write_temp("syntax.fsj", "let x = in x")});
        CHECK(o.code == 2);
        CHECK(contains(o.err, "syntax.fsj:1:9:"));
    }

    TEST_CASE("well-formedness errors are semantic failures") {
        Outcome o = fsj_cli({"check", write_temp("cycle.fsj", "class A extends A { A() { super(); } } unit")});
        CHECK(o.code == 1);
        CHECK(contains(o.err, "error"));
    }

    TEST_CASE("several files: the worst outcome wins") {
        Outcome o = fsj_cli({"check", corpus("peano_pull.fsj"), corpus("composite_assign.fsj")});
        CHECK(o.code == 1);
        CHECK(contains(o.out, "peano_pull.fsj: ok"));
    }

    TEST_CASE("every corpus file is accepted except the composite reassignment") {
        for (const auto& path : fsj::test::corpus_files()) {
            CAPTURE(path.filename().string());
            int expected = path.filename() == "composite_assign.fsj" ? 1 : 0;
            CHECK(fsj_cli({"check", path.string()}).code == expected);
        }
    }
}

TEST_SUITE("fsj run") {
    TEST_CASE("main unit prints unit") {
        Outcome o = fsj_cli({"run", corpus("unit_main.fsj")});
        CHECK(o.code == 0);
        CHECK(contains(o.out, "result: unit\n"));
    }

    TEST_CASE("pull example decodes to nine") {
        Outcome o = fsj_cli({"run", corpus("peano_pull.fsj")});
        CHECK(o.code == 0);
        CHECK(contains(o.out, "(succ-depth 9)"));
        CHECK(contains(o.out, "objects: "));
        CHECK(contains(o.out, "handlers: none"));
    }

    TEST_CASE("push example decodes to six and lists the handler key") {
        Outcome o = fsj_cli({"run", corpus("subscribe_push.fsj")});
        CHECK(o.code == 0);
        CHECK(contains(o.out, "(succ-depth 6)"));
        CHECK(contains(o.out, "handlers: @1.value(1)"));
    }

    TEST_CASE("looping handler exhausts fuel with the pending key") {
        Outcome o = fsj_cli({"run", "--fuel", "2000", corpus("handler_loop.fsj")});
        CHECK(o.code == 3);
        CHECK(contains(o.err, "fuel exhausted after 2000 steps"));
        CHECK(contains(o.err, "pending effect on @1.state"));
    }

    TEST_CASE("ill-typed programs are not run") {
        Outcome o = fsj_cli({"run", corpus("composite_assign.fsj")});
        CHECK(o.code == 1);
        CHECK_FALSE(contains(o.out, "result:"));
    }

    TEST_CASE("fuel must be positive") {
        CHECK(fsj_cli({"run", "--fuel", "0", corpus("unit_main.fsj")}).code == 2);
        CHECK(fsj_cli({"run", "--fuel", "many", corpus("unit_main.fsj")}).code == 2);
    }

    TEST_CASE("fuel can come from the environment") {
        EnvGuard fuel("FSJ_FUEL", "5");
        Outcome o = fsj_cli({"run", corpus("peano_pull.fsj")});
        CHECK(o.code == 3);
        CHECK(contains(o.err, "after 5 steps"));
    }

    TEST_CASE("a mutated interpreter that gets stuck prints the internal error banner") {
        Outcome o = fsj_cli({"run", "--mutate", "skip-this-subst", corpus("peano_pull.fsj")});
        CHECK(o.code == 4);
        CHECK(contains(o.err, "INTERNAL ERROR"));
    }
}

TEST_SUITE("fsj trace") {
    TEST_CASE("text trace matches the golden file") {
        Outcome o = fsj_cli({"trace", corpus("subscribe_push.fsj")});
        CHECK(o.code == 0);
        CHECK(o.out == fsj::test::read_text(fsj::test::golden_dir() / "subscribe_push.trace"));
    }

    TEST_CASE("structured trace matches the golden file") {
        Outcome o = fsj_cli({"trace", "--format", "structured", corpus("subscribe_push.fsj")});
        CHECK(o.code == 0);
        CHECK(o.out == fsj::test::read_text(fsj::test::golden_dir() / "subscribe_push.jsonl"));
    }

    TEST_CASE("format can come from the environment") {
        EnvGuard format("FSJ_FORMAT", "structured");
        Outcome o = fsj_cli({"trace", corpus("late_subscription.fsj")});
        CHECK(o.code == 0);
        CHECK(o.out == fsj::test::read_text(fsj::test::golden_dir() / "late_subscription.jsonl"));
    }

    TEST_CASE("a signal write is followed by its continuation") {
        Outcome o = fsj_cli({"trace", corpus("dependent_update.fsj")});
        auto assign = o.out.find("rule=R-ASSIGNS");
        REQUIRE(assign != std::string::npos);
        CHECK(o.out.find("rule=R-ASSIGNCONT", assign) != std::string::npos);
    }

    TEST_CASE("unknown formats are rejected") {
        CHECK(fsj_cli({"trace", "--format", "xml", corpus("unit_main.fsj")}).code == 2);
    }
}

TEST_SUITE("fsj meta") {
    TEST_CASE("a trivial campaign succeeds") {
        Outcome o = fsj_cli({"meta", "--n", "1", "--max-classes", "0", "--witness-dir", ""});
        CHECK(o.code == 0);
        CHECK(contains(o.out, "seed=1 theorem=progress result="));
        CHECK(contains(o.out, "summary programs=1 violations=0"));
    }

    TEST_CASE("seed and count can come from the environment") {
        EnvGuard seed("FSJ_SEED", "42");
        EnvGuard count("FSJ_N", "2");
        Outcome o = fsj_cli({"meta", "--quiet", "--witness-dir", ""});
        CHECK(o.code == 0);
        CHECK(contains(o.out, "summary programs=2 "));
        CHECK_FALSE(contains(o.out, "seed=42 theorem"));
    }

    TEST_CASE("the mutated interpreter fails the campaign and writes witnesses") {
        auto dir = std::filesystem::temp_directory_path() / "fsj-cli-witnesses";
        std::filesystem::remove_all(dir);
        Outcome o = fsj_cli({"meta", "--n", "20", "--quiet", "--mutate", "skip-this-subst", "--witness-dir",
                             dir.string()});
        CHECK(o.code == 1);
        CHECK(contains(o.err, "shrunk witness written to"));
        CHECK_FALSE(std::filesystem::is_empty(dir));
    }

    TEST_CASE("campaign size must be positive") {
        CHECK(fsj_cli({"meta", "--n", "0"}).code == 2);
    }
}

TEST_SUITE("fsj usage") {
    TEST_CASE("a subcommand is required") {
        CHECK(fsj_cli({}).code == 2);
        CHECK(fsj_cli({"frobnicate"}).code == 2);
    }

    TEST_CASE("help succeeds") {
        Outcome o = fsj_cli({"--help"});
        CHECK(o.code == 0);
        CHECK(contains(o.out, "check"));
        CHECK(contains(o.out, "meta"));
    }
}
