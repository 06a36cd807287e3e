#pragma once

#include <stdexcept>
#include <string>

namespace moduli {

enum class error_kind {
    parse,
    division_by_zero,
    non_integral_genus,
    negative_genus,
    degree_too_large,
    no_full_cycle_passport,
    precondition_violated,
    domain_violation,
    invalid_subset,
    point_already_present,
    degree_overflow,
    missing_primary_table,
    unsolved_shat1,
    inconsistent_system,
    underdetermined_system,
    nonlinear_expression,
    not_engine_computable,
    unstable,
};

inline const char* to_string(error_kind k) {
    switch (k) {
    case error_kind::parse: return "Parse";
    case error_kind::division_by_zero: return "DivisionByZero";
    case error_kind::non_integral_genus: return "NonIntegralGenus";
    case error_kind::negative_genus: return "NegativeGenus";
    case error_kind::degree_too_large: return "DegreeTooLarge";
    case error_kind::no_full_cycle_passport: return "NoFullCyclePassport";
    case error_kind::precondition_violated: return "PreconditionViolated";
    case error_kind::domain_violation: return "DomainViolation";
    case error_kind::invalid_subset: return "InvalidSubset";
    case error_kind::point_already_present: return "PointAlreadyPresent";
    case error_kind::degree_overflow: return "DegreeOverflow";
    case error_kind::missing_primary_table: return "MissingPrimaryTable";
    case error_kind::unsolved_shat1: return "UnsolvedShat1";
    case error_kind::inconsistent_system: return "InconsistentSystem";
    case error_kind::underdetermined_system: return "UnderdeterminedSystem";
    case error_kind::nonlinear_expression: return "NonlinearExpression";
    case error_kind::not_engine_computable: return "NotEngineComputable";
    case error_kind::unstable: return "Unstable";
    }
    return "Unknown";
}

class error : public std::runtime_error {
public:
    error(error_kind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    error_kind kind() const noexcept { return kind_; }

private:
    error_kind kind_;
};

} // namespace moduli
