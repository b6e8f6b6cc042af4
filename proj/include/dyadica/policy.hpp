#pragma once

#include <array>
#include <string_view>

namespace dyadica::policy {

// Every numerical tolerance in the library. Reports echo this table.
inline constexpr double quasi_triangle_rel = 1e-12;
inline constexpr double form_agreement_rel = 1e-12;
inline constexpr double linearity_rel = 1e-12;
inline constexpr double pointwise_bound_rel = 1e-12;
inline constexpr double duality_rel = 1e-10;
inline constexpr double dual_weight_rel = 1e-12;
inline constexpr double lower_bound_abs = 1e-9;
inline constexpr double witness_replay_rel = 1e-9;
inline constexpr double fixed_point_match_rel = 1e-6;
inline constexpr double sweep_stability_rel = 0.10;

struct Entry {
  std::string_view name;
  double value;
  std::string_view use;
};

inline constexpr std::array<Entry, 10> table{{
    {"quasi_triangle_rel", quasi_triangle_rel, "stored a0 replayed over all triples"},
    {"form_agreement_rel", form_agreement_rel, "kernel form vs partition-sum form of the dyadic operator"},
    {"linearity_rel", linearity_rel, "linearity and homogeneity spot checks"},
    {"pointwise_bound_rel", pointwise_bound_rel, "slack on pointwise bounds with derived constants"},
    {"duality_rel", duality_rel, "dyadic pairing identity"},
    {"dual_weight_rel", dual_weight_rel, "identity v^p sigma = v mu per point"},
    {"lower_bound_abs", lower_bound_abs, "testing constant versus norm lower bound"},
    {"witness_replay_rel", witness_replay_rel, "norm witness re-evaluation"},
    {"fixed_point_match_rel", fixed_point_match_rel, "fixed-point value versus multistart value"},
    {"sweep_stability_rel", sweep_stability_rel, "max ratio across re-seeded sweeps"},
}};

}  // namespace dyadica::policy
