#pragma once

#include <memory>

#include "bun/entities.hpp"
#include "bun/textio.hpp"

namespace bun {

// The four entity namespaces an atom may address.
enum class EntityNs { Subject, Object, Op, Context };
const char* to_string(EntityNs ns);

struct PredicateExpr;
using PredicatePtr = std::shared_ptr<const PredicateExpr>;

// Total predicate language for rule constraints, trigger conditions and
// reactive guards. Concrete syntax is parenthesized prefix form:
//
//   expr := (and expr*) | (or expr*) | (not expr) | atom
//   atom := (<cmpop> <path> <literal>)         cmpop: = != < <= > >=
//         | (in <path> <literal>+)
//         | (has_role subject <name>)
//         | (has_capability subject <name>)
//         | (has_tag <object|context> <name>)
//         | (affords object <name>)
//         | (exists <path>)
//   path := subject.id | subject.attributes.<key>
//         | object.id | object.class | object.attributes.<key> | object.state.<key>
//         | op.name | op.args.<key>
//         | context.<key>
//
// Evaluation is total: an atom over a missing path is false, a comparison
// between incomparable kinds is false.
struct PredicateExpr {
    enum class Kind { Cmp, In, HasRole, HasCapability, HasTag, Affords, Exists, And, Or, Not };

    Kind kind = Kind::And;
    EntityNs entity = EntityNs::Subject;  // namespace the atom addresses
    std::string path;                     // Cmp / In / Exists
    CmpOp cmp = CmpOp::Eq;                // Cmp
    Literal value;                        // Cmp
    std::vector<Literal> values;          // In, non-empty
    std::string name;                     // HasRole / HasCapability / HasTag / Affords
    std::vector<PredicatePtr> children;   // And / Or / Not

    bool is_atom() const { return kind != Kind::And && kind != Kind::Or && kind != Kind::Not; }
};

PredicatePtr parse_predicate(std::string_view text, const std::string& origin = "");
PredicatePtr parse_predicate(TokenStream& ts);
std::string print_predicate(const PredicateExpr& e);
std::string print_predicate(const PredicatePtr& e);
bool same_structure(const PredicateExpr& a, const PredicateExpr& b);
PredicatePtr make_true();  // (and)

struct OpBinding {
    std::string name;
    AttrMap args;
};

struct BindingEnv {
    const SubjectRecord* subject = nullptr;
    const ObjectRecord* object = nullptr;
    OpBinding op;
    ContextInfo context;

    std::optional<Literal> lookup(std::string_view path) const;
};

struct EvalResult {
    bool value = false;
    // every atom in visit order (full traversal, no short-circuit omission)
    std::vector<std::pair<std::string, bool>> trace;
};

EvalResult evaluate(const PredicateExpr& e, const BindingEnv& env);
bool eval_atom(const PredicateExpr& atom, const BindingEnv& env);

std::set<EntityNs> referenced_namespaces(const PredicateExpr& e);
// Printed form of the first atom addressing a namespace outside `allowed`.
std::optional<std::string> find_namespace_violation(const PredicateExpr& e,
                                                    const std::set<EntityNs>& allowed);

// Known attribute paths and their kinds, for static lint of rules.
struct AttributeCatalog {
    std::map<std::string, LiteralKind> paths;
};

// Warns about unknown paths and type-incoherent comparisons. Never rejects.
std::vector<std::string> validate_predicate(const PredicateExpr& e, const AttributeCatalog& catalog);

}  // namespace bun
