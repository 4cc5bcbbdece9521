#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "urlab/scalar.hpp"

namespace urlab {

struct MetricViolation {
    enum class Kind { NonzeroDiagonal, Asymmetry, NonPositive, Triangle };
    Kind kind;
    std::size_t x = 0, y = 0, z = 0;  // witnessing points; z unused except for Triangle
    std::string str() const;
};

struct ValidationReport {
    std::vector<MetricViolation> violations;
    bool ok() const { return violations.empty(); }
};

/// A finite labeled point set with a square matrix of exact distances.
/// Point identity is the positional index; labels are decorative.
class FiniteMetricSpace {
public:
    FiniteMetricSpace() = default;
    /// Throws ShapeError unless dist has labels.size()^2 entries (row-major).
    FiniteMetricSpace(std::vector<std::string> labels, std::vector<Scalar> dist);

    std::size_t size() const { return labels_.size(); }
    const std::string& label(std::size_t i) const { return labels_[i]; }
    const std::vector<std::string>& labels() const { return labels_; }

    const Scalar& dist(std::size_t i, std::size_t j) const { return dist_[i * size() + j]; }
    void set_dist(std::size_t i, std::size_t j, const Scalar& v) {
        dist_[i * size() + j] = v;
        dist_[j * size() + i] = v;
    }

    /// New space with one appended point; row holds its distances to the old points.
    FiniteMetricSpace with_point(const std::string& label, const std::vector<Scalar>& row) const;

    /// Restriction to the given points, in the given order.
    FiniteMetricSpace restriction(const std::vector<std::size_t>& points) const;

    bool same_metric(const FiniteMetricSpace& o) const {
        return size() == o.size() && dist_ == o.dist_;
    }

private:
    std::vector<std::string> labels_;
    std::vector<Scalar> dist_;
};

/// Lists every violated metric axiom with witnesses; empty iff a metric space.
ValidationReport validate_metric(const FiniteMetricSpace& space);

/// An admissible distance profile for one new point over a base space.
class KatetovFunction {
public:
    KatetovFunction(FiniteMetricSpace base, std::vector<Scalar> values);
    const FiniteMetricSpace& base() const { return base_; }
    const std::vector<Scalar>& values() const { return values_; }
    const Scalar& value(std::size_t i) const { return values_[i]; }

private:
    FiniteMetricSpace base_;
    std::vector<Scalar> values_;
};

/// True iff |f(x)−f(y)| <= d(x,y) <= f(x)+f(y) for all pairs and f > 0 everywhere.
bool katetov_validate(const KatetovFunction& f);

/// One-point extension: new point b with d(b,x) = f(x). Requires a valid
/// Katetov function and a fresh label; the output passes validate_metric.
FiniteMetricSpace extend_one_point(const FiniteMetricSpace& space, const KatetovFunction& f,
                                   const std::string& label);

/// An injective point map between spaces with its measured distortion.
struct Embedding {
    std::vector<std::size_t> map;  // source index -> target index
    Scalar max_distortion;
    bool isometric() const { return max_distortion.is_zero(); }
};

/// Computes max distortion of the given map; throws on shape/injectivity problems.
Embedding measure_embedding(const FiniteMetricSpace& source, const FiniteMetricSpace& target,
                            std::vector<std::size_t> map);

/// All isometric embeddings of a into b, in lexicographic order of target indices.
std::vector<Embedding> find_isometric_embeddings(const FiniteMetricSpace& a,
                                                 const FiniteMetricSpace& b);

/// min over y in s of d(x,y); throws PreconditionError on an empty subset.
Scalar distance_to_subset(const FiniteMetricSpace& space, std::size_t x,
                          const std::vector<std::size_t>& s);

}  // namespace urlab
