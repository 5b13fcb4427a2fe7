#include "fsj/class_table.hpp"

#include <algorithm>
#include <set>

namespace fsj {

std::string_view to_string(WellFormednessKind k) {
    switch (k) {
        case WellFormednessKind::CycleError: return "CycleError";
        case WellFormednessKind::UnknownParent: return "UnknownParent";
        case WellFormednessKind::DuplicateField: return "DuplicateField";
        case WellFormednessKind::OverloadError: return "OverloadError";
        case WellFormednessKind::DuplicateClass: return "DuplicateClass";
        case WellFormednessKind::DuplicateParameter: return "DuplicateParameter";
        case WellFormednessKind::CtorMismatch: return "CtorMismatch";
        case WellFormednessKind::UnknownClass: return "UnknownClass";
    }
    return "?";
}

WellFormednessError::WellFormednessError(WellFormednessKind kind, std::string message, SourceSpan where)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), where_(where) {}

namespace {

[[noreturn]] void reject(WellFormednessKind kind, const std::string& message, SourceSpan where) {
    throw WellFormednessError(kind, message, where);
}

MethodType signature_of(const MethodDecl& m) {
    MethodType t;
    for (const auto& p : m.params) t.param_types.push_back(p.type);
    t.ret = m.return_type;
    return t;
}

void check_constructor(const ClassDecl& cl) {
    const auto& k = cl.ctor;
    std::set<std::string> names;
    for (const auto& p : k.params) {
        if (!names.insert(p.name).second)
            reject(WellFormednessKind::CtorMismatch,
                   "constructor of " + cl.name + " repeats parameter " + p.name, k.span);
    }
    std::set<std::string> to_super;
    for (const auto& a : k.super_args) {
        if (!names.count(a))
            reject(WellFormednessKind::CtorMismatch,
                   "super argument " + a + " of " + cl.name + " is not a constructor parameter", k.span);
        if (!to_super.insert(a).second)
            reject(WellFormednessKind::CtorMismatch, "parameter " + a + " passed to super twice", k.span);
    }
    std::vector<std::string> remaining;
    for (const auto& p : k.params)
        if (!to_super.count(p.name)) remaining.push_back(p.name);

    if (k.field_inits.size() != cl.source_fields.size())
        reject(WellFormednessKind::CtorMismatch,
               "constructor of " + cl.name + " initializes " + std::to_string(k.field_inits.size()) +
                   " fields but the class declares " + std::to_string(cl.source_fields.size()) +
                   " uninitialized fields",
               k.span);
    for (std::size_t i = 0; i < k.field_inits.size(); ++i) {
        const auto& init = k.field_inits[i];
        if (init.field != cl.source_fields[i].name)
            reject(WellFormednessKind::CtorMismatch,
                   "constructor of " + cl.name + " assigns this." + init.field + " where this." +
                       cl.source_fields[i].name + " is expected",
                   k.span);
        if (init.param != init.field)
            reject(WellFormednessKind::CtorMismatch,
                   "field " + init.field + " must be initialized from parameter of the same name", k.span);
    }
    if (remaining.size() != k.field_inits.size())
        reject(WellFormednessKind::CtorMismatch,
               "constructor of " + cl.name + " has parameters that are neither passed to super nor assigned",
               k.span);
    for (std::size_t i = 0; i < remaining.size(); ++i) {
        if (remaining[i] != k.field_inits[i].param)
            reject(WellFormednessKind::CtorMismatch,
                   "constructor of " + cl.name + " assigns parameters out of declaration order", k.span);
    }
}

}  // namespace

ClassTable ClassTable::build(const Program& p) {
    ClassTable ct;
    ClassDecl object;
    object.name = std::string(kObject);
    object.parent.clear();
    ct.classes_.emplace(object.name, Entry{object, {}, {}});

    for (const auto& cl : p.classes) {
        if (ct.classes_.count(cl.name))
            reject(WellFormednessKind::DuplicateClass, "class " + cl.name + " is declared twice", cl.span);
        ct.classes_.emplace(cl.name, Entry{cl, {}, {}});
        ct.order_.push_back(cl.name);
    }

    for (const auto& cl : p.classes) {
        if (!ct.classes_.count(cl.parent))
            reject(WellFormednessKind::UnknownParent, "class " + cl.name + " extends unknown class " + cl.parent,
                   cl.span);
    }

    for (const auto& cl : p.classes) {
        std::set<std::string> seen{cl.name};
        std::string cur = cl.parent;
        while (cur != kObject) {
            if (!seen.insert(cur).second)
                reject(WellFormednessKind::CycleError, "inheritance cycle through " + cl.name, cl.span);
            cur = ct.classes_.at(cur).decl.parent;
        }
    }

    // Parents are processed before children so inherited views are ready.
    std::vector<std::string> pending = ct.order_;
    std::set<std::string> done{std::string(kObject)};
    while (!pending.empty()) {
        std::vector<std::string> later;
        for (const auto& name : pending) {
            Entry& e = ct.classes_.at(name);
            if (!done.count(e.decl.parent)) {
                later.push_back(name);
                continue;
            }
            const Entry& parent = ct.classes_.at(e.decl.parent);
            const ClassDecl& cl = e.decl;

            std::set<std::string> inherited;
            for (const auto& f : parent.composite) inherited.insert(f.name);
            for (const auto& f : parent.source) inherited.insert(f.name);
            std::set<std::string> own;
            auto add_field = [&](const std::string& f, SourceSpan span) {
                if (inherited.count(f))
                    reject(WellFormednessKind::DuplicateField,
                           "field " + f + " of " + cl.name + " hides an inherited field", span);
                if (!own.insert(f).second)
                    reject(WellFormednessKind::DuplicateField, "field " + f + " is declared twice in " + cl.name,
                           span);
            };
            for (const auto& f : cl.composite_fields) add_field(f.name, f.span);
            for (const auto& f : cl.source_fields) add_field(f.name, f.span);

            e.composite = parent.composite;
            e.composite.insert(e.composite.end(), cl.composite_fields.begin(), cl.composite_fields.end());
            e.source = parent.source;
            e.source.insert(e.source.end(), cl.source_fields.begin(), cl.source_fields.end());

            check_constructor(cl);
            done.insert(name);
        }
        pending = std::move(later);
    }

    for (const auto& cl : p.classes) {
        std::set<std::string> methods;
        for (const auto& m : cl.methods) {
            if (!methods.insert(m.name).second)
                reject(WellFormednessKind::OverloadError, "method " + m.name + " is declared twice in " + cl.name,
                       m.span);
            std::set<std::string> params;
            for (const auto& prm : m.params)
                if (!params.insert(prm.name).second)
                    reject(WellFormednessKind::DuplicateParameter,
                           "parameter " + prm.name + " repeated in " + cl.name + "." + m.name, m.span);
            if (auto inherited = ct.mtype(m.name, cl.parent); inherited && *inherited != signature_of(m))
                reject(WellFormednessKind::OverloadError,
                       "method " + cl.name + "." + m.name + " overrides with a different signature", m.span);
        }
    }
    return ct;
}

const ClassTable::Entry& ClassTable::entry(const std::string& cls) const {
    auto it = classes_.find(cls);
    if (it == classes_.end()) reject(WellFormednessKind::UnknownClass, "unknown class " + cls, {});
    return it->second;
}

bool ClassTable::contains(const std::string& cls) const { return classes_.count(cls) != 0; }

const ClassDecl& ClassTable::decl(const std::string& cls) const { return entry(cls).decl; }

const std::string& ClassTable::parent(const std::string& cls) const { return entry(cls).decl.parent; }

const std::vector<CompositeField>& ClassTable::composite(const std::string& cls) const {
    return entry(cls).composite;
}

const std::vector<SourceField>& ClassTable::source(const std::string& cls) const { return entry(cls).source; }

std::optional<MethodBody> ClassTable::mbody(const std::string& method, const std::string& cls) const {
    for (const Entry* e = &entry(cls);;) {
        for (const auto& m : e->decl.methods) {
            if (m.name != method) continue;
            MethodBody b;
            for (const auto& p : m.params) b.params.push_back(p.name);
            b.body = m.body;
            return b;
        }
        if (e->decl.name == kObject) return std::nullopt;
        e = &entry(e->decl.parent);
    }
}

std::optional<MethodType> ClassTable::mtype(const std::string& method, const std::string& cls) const {
    for (const Entry* e = &entry(cls);;) {
        for (const auto& m : e->decl.methods)
            if (m.name == method) return signature_of(m);
        if (e->decl.name == kObject) return std::nullopt;
        e = &entry(e->decl.parent);
    }
}

std::optional<FieldType> ClassTable::ftype(const std::string& cls, const std::string& field) const {
    const Entry& e = entry(cls);
    for (const auto& f : e.composite)
        if (f.name == field) return FieldType{f.modifier, f.type};
    for (const auto& f : e.source)
        if (f.name == field) return FieldType{f.modifier, f.type};
    return std::nullopt;
}

std::optional<std::size_t> ClassTable::source_index(const std::string& cls, const std::string& field) const {
    const auto& src = source(cls);
    for (std::size_t i = 0; i < src.size(); ++i)
        if (src[i].name == field) return i;
    return std::nullopt;
}

std::optional<std::size_t> ClassTable::composite_index(const std::string& cls, const std::string& field) const {
    const auto& comp = composite(cls);
    for (std::size_t i = 0; i < comp.size(); ++i)
        if (comp[i].name == field) return i;
    return std::nullopt;
}

bool ClassTable::inherits(const std::string& sub, const std::string& super) const {
    for (std::string cur = sub;;) {
        if (cur == super) return true;
        const Entry& e = entry(cur);
        if (e.decl.name == kObject) return false;
        cur = e.decl.parent;
    }
}

}  // namespace fsj
