#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsj/class_table.hpp"
#include "fsj/eval.hpp"
#include "fsj/syntax.hpp"
#include "fsj/typecheck.hpp"

namespace fsj::test {

inline std::filesystem::path corpus_dir() { return FSJ_CORPUS_DIR; }
inline std::filesystem::path golden_dir() { return FSJ_GOLDEN_DIR; }

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Loaded {
    Program program;
    ClassTable table;

    explicit Loaded(Program p) : program(std::move(p)), table(ClassTable::build(program)) {}
};

inline Loaded load_source(const std::string& text) { return Loaded(parse_program(text)); }
inline Loaded load_corpus(const std::string& name) { return load_source(read_text(corpus_dir() / name)); }

/// Corpus files, sorted by name.
inline std::vector<std::filesystem::path> corpus_files() {
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(corpus_dir()))
        if (entry.path().extension() == ".fsj") out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

/// Corpus files that type-check; all others are deliberate rejections.
inline std::vector<std::filesystem::path> well_typed_corpus() {
    std::vector<std::filesystem::path> out;
    for (const auto& path : corpus_files()) {
        Loaded l = load_source(read_text(path));
        if (check_program(l.table, l.program).ok()) out.push_back(path);
    }
    return out;
}

/// Kinds reported by check_program on `text`, in report order.
inline std::vector<TypeErrorKind> error_kinds(const std::string& text) {
    Loaded l = load_source(text);
    std::vector<TypeErrorKind> kinds;
    for (const auto& e : check_program(l.table, l.program).errors) kinds.push_back(e.kind);
    return kinds;
}

inline Location L(std::uint64_t id) { return Location{id}; }

}  // namespace fsj::test
