#include "urlab/amalgam.hpp"

#include <algorithm>

#include "urlab/errors.hpp"

namespace urlab {

namespace {

void check_correspondence(const FiniteMetricSpace& x, const FiniteMetricSpace& y,
                          const Correspondence& shared) {
    if (shared.empty()) throw PreconditionError("shared part must be nonempty");
    std::vector<bool> seen_x(x.size(), false), seen_y(y.size(), false);
    for (const auto& [ix, iy] : shared) {
        if (ix >= x.size() || iy >= y.size())
            throw ShapeError("correspondence index out of range");
        if (seen_x[ix] || seen_y[iy])
            throw PreconditionError("correspondence is not a bijection");
        seen_x[ix] = seen_y[iy] = true;
    }
    for (std::size_t i = 0; i < shared.size(); ++i)
        for (std::size_t j = i + 1; j < shared.size(); ++j)
            if (x.dist(shared[i].first, shared[j].first) !=
                y.dist(shared[i].second, shared[j].second))
                throw OverlapMismatchError("shared distances disagree at pair (" +
                                           std::to_string(i) + "," + std::to_string(j) + ")");
}

/// Positions of y's points in the amalgam: shared points map to their x partner,
/// fresh points are appended after x.
std::vector<std::size_t> y_positions(const FiniteMetricSpace& x, const FiniteMetricSpace& y,
                                     const Correspondence& shared) {
    std::vector<std::size_t> pos(y.size(), SIZE_MAX);
    for (const auto& [ix, iy] : shared) pos[iy] = ix;
    std::size_t next = x.size();
    for (std::size_t i = 0; i < y.size(); ++i)
        if (pos[i] == SIZE_MAX) pos[i] = next++;
    return pos;
}

}  // namespace

FiniteMetricSpace amalgamate_max(const FiniteMetricSpace& x, const FiniteMetricSpace& y,
                                 const Correspondence& shared) {
    check_correspondence(x, y, shared);
    const auto pos = y_positions(x, y, shared);
    std::vector<std::size_t> fresh;  // y indices of non-shared points, in order
    for (std::size_t i = 0; i < y.size(); ++i)
        if (pos[i] >= x.size()) fresh.push_back(i);

    std::vector<std::string> labels = x.labels();
    for (std::size_t iy : fresh) labels.push_back(y.label(iy));
    const std::size_t n = labels.size();
    std::vector<Scalar> d(n * n, Scalar(0));
    auto at = [&](std::size_t i, std::size_t j) -> Scalar& { return d[i * n + j]; };

    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) at(i, j) = x.dist(i, j);
    for (std::size_t fi = 0; fi < fresh.size(); ++fi)
        for (std::size_t fj = 0; fj < fresh.size(); ++fj)
            at(x.size() + fi, x.size() + fj) = y.dist(fresh[fi], fresh[fj]);

    // cross distances: shortest path through the shared part
    for (std::size_t fi = 0; fi < fresh.size(); ++fi) {
        const std::size_t yi = fresh[fi];
        for (std::size_t xi = 0; xi < x.size(); ++xi) {
            bool first = true;
            Scalar best(0);
            for (const auto& [zx, zy] : shared) {
                Scalar via = x.dist(xi, zx) + y.dist(zy, yi);
                if (first || via < best) {
                    best = via;
                    first = false;
                }
            }
            at(xi, x.size() + fi) = best;
            at(x.size() + fi, xi) = best;
        }
    }
    return FiniteMetricSpace(std::move(labels), std::move(d));
}

Triple amalgamate_max(const Triple& x, const Triple& y, const Correspondence& shared) {
    // shared retraction/potential agreement: r of shared is shared and corresponds
    std::vector<std::size_t> x_to_y(x.size(), SIZE_MAX), y_to_x(y.size(), SIZE_MAX);
    for (const auto& [ix, iy] : shared) {
        x_to_y[ix] = iy;
        y_to_x[iy] = ix;
    }
    for (const auto& [ix, iy] : shared) {
        if (x.p(ix) != y.p(iy))
            throw OverlapMismatchError("shared potentials disagree at x-point " +
                                       std::to_string(ix));
        const std::size_t rx = x.r(ix), ry = y.r(iy);
        if (x_to_y[rx] == SIZE_MAX || x_to_y[rx] != ry)
            throw OverlapMismatchError("shared retractions disagree at x-point " +
                                       std::to_string(ix));
    }
    FiniteMetricSpace space = amalgamate_max(x.space(), y.space(), shared);
    const auto pos = y_positions(x.space(), y.space(), shared);
    std::vector<std::size_t> r(space.size());
    std::vector<Scalar> p(space.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        r[i] = x.r(i);
        p[i] = x.p(i);
    }
    for (std::size_t iy = 0; iy < y.size(); ++iy) {
        if (pos[iy] < x.size()) continue;
        r[pos[iy]] = pos[y.r(iy)];
        p[pos[iy]] = y.p(iy);
    }
    return Triple(std::move(space), std::move(r), std::move(p));
}

Scalar amalgamate_min_bridge(const FiniteMetricSpace& left, std::size_t a,
                             const FiniteMetricSpace& right, std::size_t b,
                             const Correspondence& shared) {
    if (left.size() != shared.size() + 1 || right.size() != shared.size() + 1)
        throw ShapeError("minimal amalgamation expects X∪{a} and X∪{b}");
    for (const auto& [za, zb] : shared)
        if (za == a || zb == b) throw ShapeError("designated point listed as shared");
    check_correspondence(left, right, shared);
    Scalar best(0);
    for (const auto& [za, zb] : shared)
        best = scalar_max(best, scalar_abs(left.dist(a, za) - right.dist(zb, b)));
    return best;
}

FiniteMetricSpace amalgamate_min(const FiniteMetricSpace& left, std::size_t a,
                                 const FiniteMetricSpace& right, std::size_t b,
                                 const Correspondence& shared) {
    const Scalar bridge = amalgamate_min_bridge(left, a, right, b, shared);
    if (bridge.is_zero())
        throw PreconditionError("minimal amalgamation yields an indiscernible pair (d(a,b)=0)");
    std::vector<Scalar> row(left.size());
    // b's distances: to shared points from the right side, to a the bridge value
    for (const auto& [za, zb] : shared) row[za] = right.dist(zb, b);
    row[a] = bridge;
    return left.with_point(right.label(b), row);
}

FiniteMetricSpace max_metric_regularize(const std::vector<std::string>& labels,
                                        std::vector<Scalar> dist,
                                        const std::vector<std::size_t>& r,
                                        const std::vector<Scalar>& p, RegularizeStats* stats) {
    const std::size_t n = labels.size();
    if (dist.size() != n * n || r.size() != n || p.size() != n)
        throw ShapeError("regularize input shapes disagree");
    FiniteMetricSpace d0(labels, dist);
    if (auto rep = validate_metric(d0); !rep.ok())
        throw PreconditionError("regularize input is not a metric: " +
                                rep.violations.front().str());
    for (std::size_t i = 0; i < n; ++i) {
        if (r[i] >= n || r[r[i]] != r[i])
            throw PreconditionError("retraction map is not idempotent");
        if (p[i].sign() < 0) throw PreconditionError("potential must be nonnegative");
    }
    FiniteMetricSpace rho = std::move(d0);
    const std::size_t max_rounds = n * n + 2;
    bool changed_any = false;
    for (std::size_t round = 0; round < max_rounds; ++round) {
        bool changed = false;
        FiniteMetricSpace next = rho;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                Scalar v = scalar_max(rho.dist(i, j),
                                      scalar_max(rho.dist(r[i], r[j]), scalar_abs(p[i] - p[j])));
                if (v != rho.dist(i, j)) {
                    next.set_dist(i, j, v);
                    changed = true;
                }
            }
        if (!changed) {
            if (stats) {
                stats->rounds = round + 1;
                stats->changed = changed_any;
            }
            if (auto rep = validate_metric(rho); !rep.ok())
                throw RegularizeError("fixed point is not a metric: " +
                                      rep.violations.front().str());
            return rho;
        }
        changed_any = true;
        rho = std::move(next);
    }
    throw RegularizeError("no fixed point within " + std::to_string(max_rounds) + " rounds");
}

RetractionExtension extend_retraction_over_point(const Triple& big,
                                                 const std::vector<std::size_t>& a_in_c,
                                                 const Triple& small, const Scalar& eps,
                                                 const FiniteMetricSpace& d_union) {
    const std::size_t m = a_in_c.size();
    if (small.size() != m + 1)
        throw ShapeError("small triple must be A∪{b} with A matching a_in_c");
    const std::size_t b = m;  // b is the small triple's last point
    const std::size_t nc = big.size();
    if (d_union.size() != nc + 1) throw ShapeError("d_union must cover C then b");
    if (eps.sign() < 0) throw PreconditionError("eps must be nonnegative");

    // d_union extends both metrics
    for (std::size_t i = 0; i < nc; ++i)
        for (std::size_t j = 0; j < nc; ++j)
            if (d_union.dist(i, j) != big.dist(i, j))
                throw PreconditionError("d_union does not extend the metric on C");
    for (std::size_t i = 0; i < m; ++i) {
        if (d_union.dist(a_in_c[i], nc) != small.dist(i, b))
            throw PreconditionError("d_union does not extend the metric on B");
        for (std::size_t j = 0; j < m; ++j)
            if (big.dist(a_in_c[i], a_in_c[j]) != small.dist(i, j))
                throw OverlapMismatchError("C and B disagree on A");
    }
    // r' maps A into A; discrepancy preconditions on A
    std::vector<std::size_t> a_pos(big.size(), SIZE_MAX);
    for (std::size_t i = 0; i < m; ++i) a_pos[a_in_c[i]] = i;
    for (std::size_t i = 0; i < m; ++i) {
        if (small.r(i) >= m) throw PreconditionError("r' does not map A into A");
        if (big.dist(big.r(a_in_c[i]), a_in_c[small.r(i)]) > eps)
            throw PreconditionError("retraction discrepancy on A exceeds eps");
        if (scalar_abs(big.p(a_in_c[i]) - small.p(i)) > eps)
            throw PreconditionError("potential discrepancy on A exceeds eps");
    }

    // the two cases of the extension at b
    std::vector<std::size_t> r_ext(nc + 1);
    std::vector<Scalar> p_ext(nc + 1);
    for (std::size_t i = 0; i < nc; ++i) {
        r_ext[i] = big.r(i);
        p_ext[i] = big.p(i);
    }
    if (small.r(b) == b) {
        if (!small.p(b).is_zero())
            throw PreconditionError("fixed new point must carry zero potential");
        r_ext[nc] = nc;
        p_ext[nc] = Scalar(0);
    } else {
        const std::size_t a0 = small.r(b);
        if (small.r(a0) != a0)
            throw PreconditionError("r'(b) is not in r[A]");
        r_ext[nc] = big.r(a_in_c[a0]);
        p_ext[nc] = small.p(b);
    }

    std::vector<Scalar> d;
    d.reserve((nc + 1) * (nc + 1));
    for (std::size_t i = 0; i <= nc; ++i)
        for (std::size_t j = 0; j <= nc; ++j) d.push_back(d_union.dist(i, j));
    std::vector<std::string> labels = d_union.labels();
    FiniteMetricSpace rho = max_metric_regularize(labels, std::move(d), r_ext, p_ext);

    Triple out(rho, r_ext, p_ext);
    if (auto rep = validate_triple(out); !rep.ok())
        throw Error("retraction extension produced an invalid triple: " + rep.str());

    // measured quantities over A∪{b}
    auto in_union = [&](std::size_t k) { return k < m ? a_in_c[k] : nc; };
    Scalar shift(0), rgap(0), pgap(0);
    for (std::size_t i = 0; i <= m; ++i) {
        for (std::size_t j = i + 1; j <= m; ++j)
            shift = scalar_max(
                shift, scalar_abs(rho.dist(in_union(i), in_union(j)) -
                                  d_union.dist(in_union(i), in_union(j))));
        const std::size_t u = in_union(i);
        rgap = scalar_max(rgap, rho.dist(r_ext[u], in_union(small.r(i))));
        pgap = scalar_max(pgap, scalar_abs(p_ext[u] - small.p(i)));
    }
    if (rgap > eps || pgap > eps)
        throw Error("retraction extension exceeded its eps bound (internal)");
    return RetractionExtension{std::move(out), std::move(shift), std::move(rgap),
                               std::move(pgap)};
}

Triple glue_epsilon_copy(const Triple& chain, const std::vector<std::size_t>& copy_in_chain,
                         const Triple& fresh, const Scalar& eps) {
    const std::size_t m = copy_in_chain.size();
    if (fresh.size() != m) throw ShapeError("fresh copy size does not match the designated copy");
    if (m == 0) throw PreconditionError("designated copy must be nonempty");
    if (eps.sign() <= 0)
        throw PreconditionError("gluing distance must be positive (indiscernible pair otherwise)");
    if (!chain.is_r_closed(copy_in_chain))
        throw PreconditionError("designated copy is not closed under the chain retraction");
    std::vector<std::size_t> pos(chain.size(), SIZE_MAX);
    for (std::size_t j = 0; j < m; ++j) pos[copy_in_chain[j]] = j;
    for (std::size_t j = 0; j < m; ++j) {
        // retraction patterns correspond
        if (pos[chain.r(copy_in_chain[j])] != fresh.r(j))
            throw PreconditionError("retraction pattern mismatch at copy point " +
                                    std::to_string(j));
        if (!(scalar_abs(chain.p(copy_in_chain[j]) - fresh.p(j)) < eps))
            throw PreconditionError("potential difference not < eps at copy point " +
                                    std::to_string(j));
        for (std::size_t k = j + 1; k < m; ++k)
            if (scalar_abs(chain.dist(copy_in_chain[j], copy_in_chain[k]) - fresh.dist(j, k)) >
                eps)
                throw PreconditionError("distance difference exceeds eps at copy pair (" +
                                        std::to_string(j) + "," + std::to_string(k) + ")");
    }

    // bridge block on X₁ ∪ X_{n+1}
    const std::size_t bn = 2 * m;
    std::vector<std::string> labels;
    labels.reserve(bn);
    for (std::size_t j = 0; j < m; ++j) labels.push_back(chain.space().label(copy_in_chain[j]));
    for (std::size_t j = 0; j < m; ++j) labels.push_back(fresh.space().label(j));
    std::vector<Scalar> d(bn * bn, Scalar(0));
    auto at = [&](std::size_t i, std::size_t j) -> Scalar& { return d[i * bn + j]; };
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = 0; k < m; ++k) {
            at(j, k) = chain.dist(copy_in_chain[j], copy_in_chain[k]);
            at(m + j, m + k) = fresh.dist(j, k);
        }
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = 0; k < m; ++k) {
            if (j == k) {
                at(j, m + k) = eps;
                at(m + k, j) = eps;
                continue;
            }
            Scalar best = chain.dist(copy_in_chain[j], copy_in_chain[0]) + fresh.dist(0, k);
            for (std::size_t q = 1; q < m; ++q)
                best = scalar_min(best, chain.dist(copy_in_chain[j], copy_in_chain[q]) +
                                            fresh.dist(q, k));
            at(j, m + k) = eps + best;
            at(m + k, j) = at(j, m + k);
        }
    std::vector<std::size_t> r_blk(bn);
    std::vector<Scalar> p_blk(bn);
    for (std::size_t j = 0; j < m; ++j) {
        r_blk[j] = pos[chain.r(copy_in_chain[j])];
        p_blk[j] = chain.p(copy_in_chain[j]);
        r_blk[m + j] = m + fresh.r(j);
        p_blk[m + j] = fresh.p(j);
    }
    FiniteMetricSpace rho = max_metric_regularize(labels, std::move(d), r_blk, p_blk);
    Triple block(rho, r_blk, p_blk);

    // glue the block back onto the untouched remainder of the chain
    Correspondence shared;
    for (std::size_t j = 0; j < m; ++j) shared.emplace_back(copy_in_chain[j], j);
    Triple out = amalgamate_max(chain, block, shared);
    for (std::size_t j = 0; j < m; ++j)
        if (out.dist(copy_in_chain[j], chain.size() + j) != eps)
            throw Error("glued pair distance is not exactly eps (internal)");
    if (auto rep = validate_triple(out); !rep.ok())
        throw Error("glue produced an invalid triple: " + rep.str());
    return out;
}

CompletionResult commuting_completion(const Triple& ambient, const Embedding& i,
                                      const Triple& small, const Scalar& eps) {
    DiscrepancyReport rep = discrepancy(ambient, i, small);
    if (!(rep.commutation < eps && rep.potential < eps))
        throw PreconditionError("embedding discrepancy is not < eps");

    // pulled-back points: ambient retraction images missed by the embedding
    std::vector<std::size_t> in_image(ambient.size(), SIZE_MAX);
    for (std::size_t x = 0; x < small.size(); ++x) in_image[i.map[x]] = x;
    std::vector<std::size_t> extras;  // ambient indices, first-occurrence order
    for (std::size_t x = 0; x < small.size(); ++x) {
        const std::size_t u = ambient.r(i.map[x]);
        if (in_image[u] == SIZE_MAX &&
            std::find(extras.begin(), extras.end(), u) == extras.end())
            extras.push_back(u);
    }

    std::vector<std::size_t> full_map = i.map;  // X index -> ambient index
    full_map.insert(full_map.end(), extras.begin(), extras.end());
    const std::size_t n = full_map.size();

    std::vector<std::size_t> back(ambient.size(), SIZE_MAX);
    for (std::size_t k = 0; k < n; ++k) back[full_map[k]] = k;

    std::vector<std::string> labels;
    labels.reserve(n);
    for (std::size_t x = 0; x < small.size(); ++x) labels.push_back(small.space().label(x));
    for (std::size_t e = 0; e < extras.size(); ++e)
        labels.push_back("c" + std::to_string(e) + "." + ambient.space().label(extras[e]));

    std::vector<Scalar> d(n * n, Scalar(0));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            d[a * n + b] = ambient.dist(full_map[a], full_map[b]);
    std::vector<std::size_t> r(n);
    std::vector<Scalar> p(n);
    for (std::size_t k = 0; k < n; ++k) {
        r[k] = back[ambient.r(full_map[k])];
        p[k] = ambient.p(full_map[k]);
    }
    Triple out(FiniteMetricSpace(std::move(labels), std::move(d)), std::move(r), std::move(p));
    Embedding emb{std::move(full_map), Scalar(0)};
    DiscrepancyReport check = discrepancy(ambient, emb, out);
    if (!check.is_exact()) throw Error("completion is not exactly commuting (internal)");
    if (rep.is_exact() && extras.empty()) {
        // exactly commuting input: X = A unchanged
        return CompletionResult{small, std::move(emb)};
    }
    return CompletionResult{std::move(out), std::move(emb)};
}

}  // namespace urlab
