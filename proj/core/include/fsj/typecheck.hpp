#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsj/ast.hpp"
#include "fsj/class_table.hpp"

namespace fsj {

enum class TypeErrorKind {
    UnboundVar,
    UnknownField,
    UnknownMethod,
    ArgArity,
    ArgSubtype,
    AssignToComposite,
    AssignTypeMismatch,
    SubscribeOnNonSignal,
    SubscribeHandlerNotUnit,
    SeqLeftNotUnit,
    BraceBodyNotUnit,
    UnitMisuse,
    UnknownLocation,
    BadInitializer,
    BadCompositeModifier,
    CtorShape,
    MethodBodyType,
    UnknownClassType,
};

std::string_view to_string(TypeErrorKind k);

struct TypeError {
    TypeErrorKind kind;
    std::string message;
    SourceSpan span;
};

/// Carries a TypeError out of routines that have no result channel
/// (is_subtype).
class TypeCheckFailure : public std::runtime_error {
public:
    explicit TypeCheckFailure(TypeError error);
    const TypeError& error() const { return error_; }

private:
    TypeError error_;
};

/// Variables to class names. Variables never have type Unit.
class TypeEnv {
public:
    TypeEnv() = default;

    TypeEnv bind(const std::string& var, const std::string& cls) const;
    const std::string* lookup(const std::string& var) const;
    const std::map<std::string, std::string>& bindings() const { return bindings_; }

private:
    std::map<std::string, std::string> bindings_;
};

/// Locations to class names.
using StoreTyping = std::map<Location, std::string>;

class TypeResult {
public:
    TypeResult(TypeName type) : type_(std::move(type)) {}
    TypeResult(TypeError error) : error_(std::move(error)) {}

    bool ok() const { return type_.has_value(); }
    const TypeName& type() const { return *type_; }
    const TypeError& error() const { return *error_; }

private:
    std::optional<TypeName> type_;
    std::optional<TypeError> error_;
};

/// Reflexive-transitive closure of `extends`; Unit is related only to
/// itself. Throws TypeCheckFailure(UnknownClassType).
bool is_subtype(const ClassTable& ct, const TypeName& sub, const TypeName& super);

/// Expression typing. The rules are syntax directed, so the result is
/// unique when it exists.
TypeResult type_expr(const ClassTable& ct, const TypeEnv& env, const StoreTyping& store, const Expr& e);

/// Field initializers may only be built from variables, field accesses,
/// invocations and instance creations.
bool check_init(const Expr& e);

/// Class well-formedness; collects every member error. Empty means ok.
std::vector<TypeError> check_class(const ClassTable& ct, const ClassDecl& cl);

struct ProgramCheck {
    std::vector<TypeError> errors;
    std::optional<TypeName> main_type;

    bool ok() const { return errors.empty(); }
};

/// Checks every class, then the main expression under empty environments.
ProgramCheck check_program(const ClassTable& ct, const Program& p);

}  // namespace fsj
