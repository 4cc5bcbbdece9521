#pragma once

#include "urlab/triple.hpp"

namespace urlab {

/// A 1-Lipschitz idempotent retraction on a finite stage space, with the
/// distance-to-retract function derived exactly (equality by construction,
/// unlike Triple potentials).
class RetractionOnStage {
public:
    RetractionOnStage(FiniteMetricSpace space, std::vector<std::size_t> map);

    const FiniteMetricSpace& space() const { return space_; }
    std::size_t size() const { return space_.size(); }
    std::size_t map(std::size_t i) const { return map_[i]; }
    const std::vector<std::size_t>& retraction() const { return map_; }
    const Scalar& derived_potential(std::size_t i) const { return derived_[i]; }
    std::vector<std::size_t> retract_points() const;
    bool same_stage(const RetractionOnStage& o) const { return space_.same_metric(o.space_); }

private:
    FiniteMetricSpace space_;
    std::vector<std::size_t> map_;
    std::vector<Scalar> derived_;
};

/// Pointwise neighborhood: d(r(x), u(x)) < eps for every listed point.
bool in_neighborhood_p(const RetractionOnStage& u, const RetractionOnStage& r,
                       const std::vector<std::size_t>& xs, const Scalar& eps);

/// Pointwise retract neighborhood: the above plus |D_u(x) − D_r(x)| < eps.
bool in_neighborhood_pr(const RetractionOnStage& u, const RetractionOnStage& r,
                        const std::vector<std::size_t>& xs, const Scalar& eps);

/// Uniform neighborhood: sup over all stage points of d(r(x), u(x)) < eps.
bool in_neighborhood_u(const RetractionOnStage& u, const RetractionOnStage& r,
                       const Scalar& eps);

enum class PropFourSet { B, C, E, F };

struct SetMembershipParams {
    Embedding emb;                        // i (for E, F) or i' (for B, C) into the stage
    std::vector<std::size_t> r_small;     // retraction of the small triple
    std::vector<Scalar> p_small;          // its potential
    std::size_t x = 0;                    // the point being tested
    unsigned long n = 1;                  // the 1/n scale
};

/// Strict-inequality membership in the B/C/E/F sets: commutation within
/// 5/n (B) or 1/n (E), potential within 3/n (C) or 1/n (F).
bool set_membership(const RetractionOnStage& u, const SetMembershipParams& params,
                    PropFourSet which);

/// Conjugation S = I⁻¹ ∘ u ∘ I by a distance-preserving bijection of the stage.
RetractionOnStage conjugate(const std::vector<std::size_t>& iso, const RetractionOnStage& u);

/// When u and r share the retract set, the pointwise and pointwise-retract
/// predicates coincide; this evaluates both sides of that equivalence.
bool pr_equals_p_on_shared_retract(const RetractionOnStage& u, const RetractionOnStage& r,
                                   const std::vector<std::size_t>& xs, const Scalar& eps);

}  // namespace urlab
