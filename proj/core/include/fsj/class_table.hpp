#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsj/ast.hpp"

namespace fsj {

enum class WellFormednessKind {
    CycleError,
    UnknownParent,
    DuplicateField,
    OverloadError,
    DuplicateClass,
    DuplicateParameter,
    CtorMismatch,
    UnknownClass,
};

std::string_view to_string(WellFormednessKind k);

/// Violation of the global assumptions on a class table. Also thrown by the
/// lookup functions when asked about a class that is not in the table.
class WellFormednessError : public std::runtime_error {
public:
    WellFormednessError(WellFormednessKind kind, std::string message, SourceSpan where = {});

    WellFormednessKind kind() const { return kind_; }
    SourceSpan where() const { return where_; }

private:
    WellFormednessKind kind_;
    SourceSpan where_;
};

struct MethodBody {
    std::vector<std::string> params;
    Expr body;
};

struct MethodType {
    std::vector<std::string> param_types;
    TypeName ret = TypeName::unit();
    friend bool operator==(const MethodType&, const MethodType&) = default;
};

struct FieldType {
    Modifier modifier = Modifier::Plain;
    std::string type;
    friend bool operator==(const FieldType&, const FieldType&) = default;
};

/// Class table with `Object` injected at the root. Immutable once built;
/// all lookups are memoized at construction.
class ClassTable {
public:
    /// Validates acyclicity, known parents, no field hiding, no overloading
    /// and constructor self-consistency. Throws WellFormednessError.
    static ClassTable build(const Program& p);

    bool contains(const std::string& cls) const;
    /// Throws WellFormednessError(UnknownClass).
    const ClassDecl& decl(const std::string& cls) const;
    const std::string& parent(const std::string& cls) const;

    /// Declared class names in declaration order, without Object.
    const std::vector<std::string>& class_names() const { return order_; }

    /// Initialized fields of `cls` and its ancestors, ancestors first.
    const std::vector<CompositeField>& composite(const std::string& cls) const;
    /// Constructor-initialized fields of `cls` and its ancestors, ancestors first.
    const std::vector<SourceField>& source(const std::string& cls) const;

    std::optional<MethodBody> mbody(const std::string& method, const std::string& cls) const;
    std::optional<MethodType> mtype(const std::string& method, const std::string& cls) const;
    std::optional<FieldType> ftype(const std::string& cls, const std::string& field) const;

    /// Index of `field` in source(cls), if it is a source field.
    std::optional<std::size_t> source_index(const std::string& cls, const std::string& field) const;
    /// Index of `field` in composite(cls), if it is a composite field.
    std::optional<std::size_t> composite_index(const std::string& cls, const std::string& field) const;

    /// Reflexive-transitive closure of `extends` between class names.
    bool inherits(const std::string& sub, const std::string& super) const;

private:
    struct Entry {
        ClassDecl decl;
        std::vector<CompositeField> composite;
        std::vector<SourceField> source;
    };

    const Entry& entry(const std::string& cls) const;

    std::map<std::string, Entry> classes_;
    std::vector<std::string> order_;
};

}  // namespace fsj
