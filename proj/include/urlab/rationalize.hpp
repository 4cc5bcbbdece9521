#pragma once

#include <array>
#include <optional>

#include "urlab/stage.hpp"

namespace urlab {

/// Audit record of one rationalization run: the additive triples, the
/// irrational values, every epsilon, the scaling factor and each pair's branch.
struct RationalizationTrace {
    std::vector<std::array<std::size_t, 3>> additive_triples;  // (x,y,z): d(x,z) = d(x,y)+d(y,z)
    std::vector<Scalar> irrational_values;                     // C, ascending

    // nullopt encodes an empty min-set (treated as +infinity)
    std::optional<Scalar> eps1, eps2, eps3, eps4;
    Scalar eps0, eps5;

    Rat scale_a{1};
    std::optional<Scalar> potential_margin;  // m of step 3
    Scalar potential_delta{0};               // delta of step 3

    struct PairDecision {
        std::size_t x = 0, y = 0;
        enum class Branch { KeptRational, RetractInterval, NonRetractInterval } branch =
            Branch::KeptRational;
        Scalar eta;
        Rat rho;
    };
    std::vector<PairDecision> pair_decisions;

    std::vector<std::string> conflicts;  // pullback conflicts, reported not resolved
};

/// Lemma-style rationalization: returns a triple with all-rational distances
/// and potential such that d <= rho <= d + eps, |p' − p| < eps, the frozen
/// sub-matrix is bit-equal, and r, p' stay 1-Lipschitz. Idempotent on rational
/// valid triples. frozen points must have pairwise rational distances.
std::pair<Triple, RationalizationTrace> rationalize_triple(const Triple& t, const Rat& eps,
                                                           const std::vector<std::size_t>& frozen);

struct NearbyEmbedding {
    AmbientStage stage;           // grown stage
    Embedding copy;               // target index -> stage index of the exact copy
    std::vector<std::size_t> helper_points;  // extra retract points added by the fallback
    bool pattern_copy = false;    // retraction was extended by partner-pattern copy
    Scalar max_displacement;      // max over i of d(partner_i, copy_i); = eps/2 for exact input
};

/// Realizes an exact isometric copy of a rational target space next to the
/// partner points (bridges of length eps/2, cross distances by the shortest
/// path formula), never changing existing stage distances. The stage
/// retraction and potential are extended to the new points validly.
NearbyEmbedding nearby_rational_embedding(const AmbientStage& stage,
                                          const std::vector<std::size_t>& partners,
                                          const FiniteMetricSpace& target, const Scalar& eps);

}  // namespace urlab
