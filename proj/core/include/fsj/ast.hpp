#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fsj {

/// Position of a node in its source text. 1-based; zero means synthesized.
struct SourceSpan {
    std::uint32_t line = 0;
    std::uint32_t column = 0;

    // Spans are not part of a node's identity.
    friend bool operator==(const SourceSpan&, const SourceSpan&) { return true; }
};

enum class Modifier { Plain, Signal };

std::string_view to_string(Modifier m);

/// Either a class type or Unit.
class TypeName {
public:
    static TypeName unit() { return TypeName(); }
    static TypeName of(std::string class_name) { return TypeName(std::move(class_name)); }

    bool is_unit() const { return name_.empty(); }
    bool is_class() const { return !name_.empty(); }
    const std::string& class_name() const { return name_; }
    std::string str() const { return is_unit() ? "Unit" : name_; }

    friend bool operator==(const TypeName&, const TypeName&) = default;

private:
    TypeName() = default;
    explicit TypeName(std::string name) : name_(std::move(name)) {}
    std::string name_;
};

struct Location {
    std::uint64_t id = 0;
    friend auto operator<=>(const Location&, const Location&) = default;
};

/// A field access on a location, `l.f`: the key of the handler store.
struct FieldKey {
    Location loc;
    std::string field;
    friend auto operator<=>(const FieldKey&, const FieldKey&) = default;
};

std::string to_string(Location loc);
std::string to_string(const FieldKey& key);

struct ExprRep;

/// Immutable expression tree with shared subterms.
class Expr {
public:
    /// The empty expression.
    Expr();

    static Expr var(std::string name, SourceSpan span = {});
    static Expr field(Expr recv, std::string field, SourceSpan span = {});
    static Expr invoke(Expr recv, std::string method, std::vector<Expr> args, SourceSpan span = {});
    static Expr make_new(std::string cls, std::vector<Expr> args, SourceSpan span = {});
    static Expr assign(Expr recv, std::string field, Expr value, SourceSpan span = {});
    static Expr seq(Expr first, Expr second, SourceSpan span = {});
    static Expr subscribe(Expr recv, std::string field, Expr handler, SourceSpan span = {});
    static Expr loc(Location l, SourceSpan span = {});
    static Expr effect_brace(Expr body, FieldKey key, SourceSpan span = {});
    static Expr empty(SourceSpan span = {});
    static Expr let(std::string var, Expr bound, Expr body, SourceSpan span = {});

    template <class T>
    const T* as() const;

    template <class T>
    bool is() const { return as<T>() != nullptr; }

    bool is_value() const;
    bool is_empty() const;
    /// Location carried by a value; precondition is_value().
    Location location() const;

    const SourceSpan& span() const;
    const ExprRep& rep() const { return *rep_; }

    friend bool operator==(const Expr& a, const Expr& b);

private:
    explicit Expr(std::shared_ptr<const ExprRep> rep) : rep_(std::move(rep)) {}
    std::shared_ptr<const ExprRep> rep_;
};

namespace expr {

struct Var {
    std::string name;
};
struct FieldAccess {
    Expr recv;
    std::string field;
};
struct Invoke {
    Expr recv;
    std::string method;
    std::vector<Expr> args;
};
struct New {
    std::string cls;
    std::vector<Expr> args;
};
struct Assign {
    Expr recv;
    std::string field;
    Expr value;
};
struct Seq {
    Expr first;
    Expr second;
};
struct Subscribe {
    Expr recv;
    std::string field;
    Expr handler;
};
struct Loc {
    Location loc;
};
/// `{ body }` tagged with the assigned field; exists only at run time.
struct EffectBrace {
    Expr body;
    FieldKey key;
};
struct Empty {};
struct Let {
    std::string var;
    Expr bound;
    Expr body;
};

}  // namespace expr

using ExprNode = std::variant<expr::Var, expr::FieldAccess, expr::Invoke, expr::New, expr::Assign,
                              expr::Seq, expr::Subscribe, expr::Loc, expr::EffectBrace, expr::Empty,
                              expr::Let>;

struct ExprRep {
    ExprNode node;
    SourceSpan span;
};

template <class T>
const T* Expr::as() const {
    return std::get_if<T>(&rep_->node);
}

/// True when the tree contains a location or an effect brace.
bool has_runtime_forms(const Expr& e);

/// Number of nodes in the tree.
std::size_t expr_size(const Expr& e);

/// True when `needle` occurs as a subtree of `haystack` (including itself).
bool is_subterm(const Expr& needle, const Expr& haystack);

/// Immediate subexpressions, left to right.
std::vector<Expr> children(const Expr& e);

/// Copy of `e` with its immediate subexpressions replaced; `kids` must have
/// the arity children(e) returned.
Expr with_children(const Expr& e, const std::vector<Expr>& kids);

struct Parameter {
    std::string type;
    std::string name;
    friend bool operator==(const Parameter&, const Parameter&) = default;
};

/// Initialized field declaration: a composite signal when well formed.
struct CompositeField {
    Modifier modifier = Modifier::Signal;
    std::string type;
    std::string name;
    Expr init;
    SourceSpan span;
    friend bool operator==(const CompositeField&, const CompositeField&) = default;
};

/// Field set by the constructor: a source signal or a plain field.
struct SourceField {
    Modifier modifier = Modifier::Plain;
    std::string type;
    std::string name;
    SourceSpan span;
    friend bool operator==(const SourceField&, const SourceField&) = default;
};

struct FieldInit {
    std::string field;
    std::string param;
    friend bool operator==(const FieldInit&, const FieldInit&) = default;
};

struct ConstructorDecl {
    std::vector<Parameter> params;
    std::vector<std::string> super_args;
    std::vector<FieldInit> field_inits;
    SourceSpan span;
    friend bool operator==(const ConstructorDecl&, const ConstructorDecl&) = default;
};

struct MethodDecl {
    TypeName return_type = TypeName::unit();
    std::string name;
    std::vector<Parameter> params;
    Expr body;
    SourceSpan span;
    friend bool operator==(const MethodDecl&, const MethodDecl&) = default;
};

struct ClassDecl {
    std::string name;
    std::string parent = "Object";
    std::vector<CompositeField> composite_fields;
    std::vector<SourceField> source_fields;
    ConstructorDecl ctor;
    std::vector<MethodDecl> methods;
    SourceSpan span;
    friend bool operator==(const ClassDecl&, const ClassDecl&) = default;
};

struct Program {
    std::vector<ClassDecl> classes;
    Expr main;
    friend bool operator==(const Program&, const Program&) = default;
};

inline constexpr std::string_view kObject = "Object";
inline constexpr std::string_view kThis = "this";

}  // namespace fsj
