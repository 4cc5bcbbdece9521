#pragma once

#include <utility>

#include "urlab/triple.hpp"

namespace urlab {

/// Index correspondence between designated sub-point-sets of two objects.
using Correspondence = std::vector<std::pair<std::size_t, std::size_t>>;

/// Maximal amalgamation of two spaces over a shared part: cross distances are
/// shortest paths through the overlap. Left indices are preserved; the right
/// side's non-shared points are appended in order. Throws OverlapMismatchError
/// when the shared distances disagree.
FiniteMetricSpace amalgamate_max(const FiniteMetricSpace& x, const FiniteMetricSpace& y,
                                 const Correspondence& shared);

/// Triple form: also glues the retractions and potentials; requires them to
/// agree across the correspondence (r of a shared point must be shared).
Triple amalgamate_max(const Triple& x, const Triple& y, const Correspondence& shared);

/// Minimal amalgamation: spaces X∪{a} and X∪{b} agreeing on X exactly, joined
/// with d(a,b) = max over z in X of |d(a,z) − d(z,b)|. The output preserves the
/// left side's indices and appends b. Throws OverlapMismatchError on X
/// disagreement and PreconditionError when the formula yields 0 (indiscernible pair).
FiniteMetricSpace amalgamate_min(const FiniteMetricSpace& left, std::size_t a,
                                 const FiniteMetricSpace& right, std::size_t b,
                                 const Correspondence& shared);

/// The bridge value max_z |d_left(a,z) − d_right(z,b)| without building the union.
Scalar amalgamate_min_bridge(const FiniteMetricSpace& left, std::size_t a,
                             const FiniteMetricSpace& right, std::size_t b,
                             const Correspondence& shared);

struct RegularizeStats {
    std::size_t rounds = 0;
    bool changed = false;
};

/// Repairs 1-Lipschitzness of (r, p) against a metric d by iterating
/// ρ(x,y) = max{ρ(x,y), ρ(r(x),r(y)), |p(x)−p(y)|} to a fixed point.
/// d must already be a metric and r idempotent, p >= 0. Throws RegularizeError
/// if no fixed point is reached within size^2 rounds.
FiniteMetricSpace max_metric_regularize(const std::vector<std::string>& labels,
                                        std::vector<Scalar> dist,
                                        const std::vector<std::size_t>& r,
                                        const std::vector<Scalar>& p,
                                        RegularizeStats* stats = nullptr);

struct RetractionExtension {
    Triple triple;              // on C ∪ {b}, C indices preserved, b appended
    Scalar max_metric_shift;    // max |ρ − d| over (A∪{b})²
    Scalar max_retract_gap;     // max ρ(R'(x), r'(x)) over A∪{b}
    Scalar max_potential_gap;   // max |P'(x) − p'(x)| over A∪{b}
};

/// Extends the retraction of a triple (C,R,P) over one new point b carried by
/// a small triple on A∪{b}, A = C∩B. a_in_c maps the small triple's A-part
/// (indices 0..|A|-1, b last) into C; d_union is a metric on C then b that
/// extends both sides. Requires the A-discrepancies to be <= eps.
RetractionExtension extend_retraction_over_point(const Triple& big,
                                                 const std::vector<std::size_t>& a_in_c,
                                                 const Triple& small, const Scalar& eps,
                                                 const FiniteMetricSpace& d_union);

/// Glues a fresh triple copy next to a designated copy inside a chain triple,
/// with matched pairs at distance exactly eps. copy_in_chain[j] corresponds to
/// fresh point j. The chain's indices are preserved; fresh points are appended.
Triple glue_epsilon_copy(const Triple& chain, const std::vector<std::size_t>& copy_in_chain,
                         const Triple& fresh, const Scalar& eps);

struct CompletionResult {
    Triple triple;        // X ⊇ A; the A-part keeps the small triple's indices
    Embedding embedding;  // exactly commuting extension of i
};

/// Completes an eps-approximately-commuting embedding to an exactly commuting
/// one by pulling back the missed retraction images from the ambient triple.
/// Throws PreconditionError when the discrepancy is not < eps in both coordinates.
CompletionResult commuting_completion(const Triple& ambient, const Embedding& i,
                                      const Triple& small, const Scalar& eps);

}  // namespace urlab
