#include <algorithm>
#include <functional>
#include <optional>
#include <set>

#include "fsj/class_table.hpp"
#include "fsj/generator.hpp"

namespace fsj {

namespace {

std::size_t count_nodes(const Expr& e) {
    std::size_t n = 1;
    for (const auto& c : children(e)) n += count_nodes(c);
    return n;
}

// Replaces the node at pre-order position `target` by `replacement`.
Expr rewrite_at(const Expr& e, std::size_t& index, std::size_t target, const Expr& replacement) {
    if (index++ == target) return replacement;
    auto kids = children(e);
    if (kids.empty()) return e;
    for (auto& k : kids) {
        if (index > target) break;
        k = rewrite_at(k, index, target, replacement);
    }
    return with_children(e, kids);
}

Expr node_at(const Expr& e, std::size_t& index, std::size_t target, bool& found) {
    if (index == target) {
        found = true;
        return e;
    }
    ++index;
    for (const auto& k : children(e)) {
        Expr r = node_at(k, index, target, found);
        if (found) return r;
    }
    return e;
}

Expr drop_new_arg(const Expr& e, const std::set<std::string>& classes, std::size_t position) {
    auto kids = children(e);
    for (auto& k : kids) k = drop_new_arg(k, classes, position);
    if (const auto* nw = e.as<expr::New>(); nw && classes.count(nw->cls) && position < kids.size()) {
        kids.erase(kids.begin() + static_cast<std::ptrdiff_t>(position));
        return Expr::make_new(nw->cls, kids, e.span());
    }
    return kids.empty() ? e : with_children(e, kids);
}

template <class F>
Program map_exprs(const Program& p, F&& f) {
    Program out = p;
    for (auto& cl : out.classes) {
        for (auto& c : cl.composite_fields) c.init = f(c.init);
        for (auto& m : cl.methods) m.body = f(m.body);
    }
    out.main = f(out.main);
    return out;
}

std::optional<Program> without_source_field(const Program& p, std::size_t cls_index, std::size_t field_index) {
    ClassTable ct;
    try {
        ct = ClassTable::build(p);
    } catch (const WellFormednessError&) {
        return std::nullopt;
    }
    const ClassDecl& owner = p.classes[cls_index];
    const std::string field = owner.source_fields[field_index].name;
    auto position = ct.source_index(owner.name, field);
    if (!position) return std::nullopt;

    std::set<std::string> affected;
    for (const auto& c : ct.class_names())
        if (ct.inherits(c, owner.name)) affected.insert(c);

    Program out = p;
    for (auto& cl : out.classes) {
        if (!affected.count(cl.name)) continue;
        auto& params = cl.ctor.params;
        std::erase_if(params, [&](const Parameter& q) { return q.name == field; });
        std::erase(cl.ctor.super_args, field);
        if (cl.name == owner.name) {
            cl.source_fields.erase(cl.source_fields.begin() + static_cast<std::ptrdiff_t>(field_index));
            std::erase_if(cl.ctor.field_inits, [&](const FieldInit& fi) { return fi.field == field; });
        }
    }
    return map_exprs(out, [&](const Expr& e) { return drop_new_arg(e, affected, *position); });
}

class Shrinker {
public:
    Shrinker(const std::function<bool(const Program&)>& keep) : keep_(keep) {}

    Program run(Program p) {
        bool progress = true;
        while (progress) {
            progress = try_structural(p) || try_expressions(p);
        }
        return p;
    }

private:
    bool accept(Program& current, Program candidate) {
        if (candidate == current) return false;
        if (!keep_(candidate)) return false;
        current = std::move(candidate);
        return true;
    }

    bool try_structural(Program& p) {
        for (std::size_t i = 0; i < p.classes.size(); ++i) {
            Program c = p;
            c.classes.erase(c.classes.begin() + static_cast<std::ptrdiff_t>(i));
            if (accept(p, std::move(c))) return true;
        }
        for (std::size_t i = 0; i < p.classes.size(); ++i) {
            for (std::size_t j = 0; j < p.classes[i].methods.size(); ++j) {
                Program c = p;
                auto& ms = c.classes[i].methods;
                ms.erase(ms.begin() + static_cast<std::ptrdiff_t>(j));
                if (accept(p, std::move(c))) return true;
            }
            for (std::size_t j = 0; j < p.classes[i].composite_fields.size(); ++j) {
                Program c = p;
                auto& fs = c.classes[i].composite_fields;
                fs.erase(fs.begin() + static_cast<std::ptrdiff_t>(j));
                if (accept(p, std::move(c))) return true;
            }
            for (std::size_t j = 0; j < p.classes[i].source_fields.size(); ++j) {
                if (auto c = without_source_field(p, i, j); c && accept(p, std::move(*c))) return true;
            }
        }
        return false;
    }

    bool try_expressions(Program& p) {
        auto slots = expression_slots(p);
        for (auto& slot : slots) {
            std::size_t n = count_nodes(slot(p));
            for (std::size_t target = 0; target < n; ++target) {
                std::size_t idx = 0;
                bool found = false;
                Expr node = node_at(slot(p), idx, target, found);
                std::vector<Expr> replacements = children(node);
                if (!node.is_empty()) replacements.push_back(Expr::empty());
                for (const auto& r : replacements) {
                    Program c = p;
                    std::size_t at = 0;
                    slot(c) = rewrite_at(slot(c), at, target, r);
                    if (accept(p, std::move(c))) return true;
                }
            }
        }
        return false;
    }

    using Slot = std::function<Expr&(Program&)>;

    static std::vector<Slot> expression_slots(const Program& p) {
        std::vector<Slot> out;
        out.push_back([](Program& q) -> Expr& { return q.main; });
        for (std::size_t i = 0; i < p.classes.size(); ++i) {
            for (std::size_t j = 0; j < p.classes[i].composite_fields.size(); ++j)
                out.push_back([i, j](Program& q) -> Expr& { return q.classes[i].composite_fields[j].init; });
            for (std::size_t j = 0; j < p.classes[i].methods.size(); ++j)
                out.push_back([i, j](Program& q) -> Expr& { return q.classes[i].methods[j].body; });
        }
        return out;
    }

    const std::function<bool(const Program&)>& keep_;
};

}  // namespace

Program shrink_program(const Program& p, const std::function<bool(const Program&)>& keep) {
    return Shrinker(keep).run(p);
}

}  // namespace fsj
