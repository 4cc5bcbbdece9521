#pragma once

#include <optional>
#include <utility>

#include "urlab/metric_space.hpp"

namespace urlab {

struct TripleViolation {
    enum class Kind {
        Metric,                // underlying space fails a metric axiom
        NotIdempotent,         // r(r(x)) != r(x)
        RetractionNotLipschitz,
        PotentialNotLipschitz,
        NegativePotential,
        ZeroSetMismatch,       // p(x) = 0 xor r(x) = x
        PotentialAboveRetractDistance,
        NotRealizable          // d(x, r(x)) > 2 p(x)
    };
    Kind kind;
    std::size_t x = 0, y = 0;
    std::string str() const;
};

struct TripleReport {
    std::vector<TripleViolation> violations;
    bool ok() const { return violations.empty(); }
    std::string str() const;
};

/// The paper's (A, d, r, p): a finite metric space with a 1-Lipschitz
/// retraction and a 1-Lipschitz potential vanishing exactly on the retract.
class Triple {
public:
    Triple() = default;
    Triple(FiniteMetricSpace space, std::vector<std::size_t> retraction,
           std::vector<Scalar> potential);

    const FiniteMetricSpace& space() const { return space_; }
    std::size_t size() const { return space_.size(); }
    std::size_t r(std::size_t i) const { return retraction_[i]; }
    const std::vector<std::size_t>& retraction() const { return retraction_; }
    const Scalar& p(std::size_t i) const { return potential_[i]; }
    const std::vector<Scalar>& potential() const { return potential_; }
    const Scalar& dist(std::size_t i, std::size_t j) const { return space_.dist(i, j); }

    bool is_retract_point(std::size_t i) const { return retraction_[i] == i; }
    std::vector<std::size_t> retract_points() const;

    /// Structural equality; labels are decorative and not compared.
    bool same_structure(const Triple& o) const {
        return space_.same_metric(o.space_) && retraction_ == o.retraction_ &&
               potential_ == o.potential_;
    }

    /// Restriction to an r-closed point set, in the given order. Throws if not r-closed.
    Triple sub_triple(const std::vector<std::size_t>& points) const;

    /// True iff the point set is closed under the retraction.
    bool is_r_closed(const std::vector<std::size_t>& points) const;

private:
    FiniteMetricSpace space_;
    std::vector<std::size_t> retraction_;
    std::vector<Scalar> potential_;
};

struct ValidateTripleOptions {
    /// Enforce d(x, r(x)) <= 2 p(x) for moved points. On by default; triples
    /// violating it can never satisfy (UR) exactly.
    bool realizability = true;
};

TripleReport validate_triple(const Triple& t, const ValidateTripleOptions& opts = {});

/// Admissible data for one new point over a base triple.
struct ExtensionSpec {
    enum class Mode { NewRetractPoint, AttachTo };
    Triple base;
    Mode mode = Mode::NewRetractPoint;
    std::size_t attach_to = 0;  // retract point index; meaningful for AttachTo
    std::vector<Scalar> f;      // Katetov values over the base points
    Scalar new_potential;       // 0 for NewRetractPoint
};

/// Empty when the spec satisfies all ExtensionSpec invariants against its base.
std::optional<std::string> extension_spec_error(const ExtensionSpec& spec);

/// The complete, duplicate-free list of admissible specs whose f-values and
/// new potential are rationals with denominator <= denom_bound and value
/// <= diam_bound. Order: NewRetractPoint block then AttachTo block, each by
/// lexicographic f (AttachTo sub-ordered by attach point, then potential).
std::vector<ExtensionSpec> enumerate_one_point_extensions(const Triple& t, unsigned denom_bound,
                                                          const Rat& diam_bound);

/// Applies the spec; throws SpecError when the spec is invalid or stale
/// (base mismatch) or the label duplicates an existing one.
Triple apply_extension(const Triple& t, const ExtensionSpec& spec, const std::string& label);

/// Exact commutation and potential gaps of an embedding into an ambient triple.
struct DiscrepancyReport {
    Scalar commutation;  // max over x of d(U(i(x)), i(r(x)))
    Scalar potential;    // max over x of |D(i(x)) − p(x)|
    bool is_exact() const { return commutation.is_zero() && potential.is_zero(); }
};

/// Measures the discrepancy of an isometric embedding; throws on non-isometric maps.
DiscrepancyReport discrepancy(const Triple& ambient, const Embedding& i, const Triple& small);

/// All isometric embeddings of small into ambient whose commutation and
/// potential gaps are both <= tol, with their reports.
std::vector<std::pair<Embedding, DiscrepancyReport>> find_commuting_embeddings(
    const Triple& small, const Triple& ambient, const Scalar& tol);

}  // namespace urlab
