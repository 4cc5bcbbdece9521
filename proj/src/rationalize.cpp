#include "urlab/rationalize.hpp"

#include <algorithm>
#include <map>

#include "urlab/errors.hpp"

namespace urlab {

namespace {

std::optional<Scalar> opt_min(std::optional<Scalar> cur, const Scalar& v) {
    if (!cur || v < *cur) return v;
    return cur;
}

Scalar fold_min(const Scalar& base, const std::optional<Scalar>& a,
                const std::optional<Scalar>& b) {
    Scalar out = base;
    if (a) out = scalar_min(out, *a);
    if (b) out = scalar_min(out, *b);
    return out;
}

}  // namespace

std::pair<Triple, RationalizationTrace> rationalize_triple(
    const Triple& t, const Rat& eps, const std::vector<std::size_t>& frozen) {
    if (eps <= 0) throw PreconditionError("eps must be positive");
    if (auto rep = validate_triple(t); !rep.ok())
        throw PreconditionError("input triple is invalid: " + rep.str());
    const std::size_t n = t.size();
    for (std::size_t a : frozen) {
        if (a >= n) throw ShapeError("frozen index out of range");
        for (std::size_t b : frozen)
            if (!t.dist(a, b).is_rational())
                throw PreconditionError("frozen distances must be rational");
    }
    RationalizationTrace trace;
    const Scalar eps_s{Rat(eps)};

    // First step: additive triples, irrational values, the eta bumps.
    std::map<std::pair<std::size_t, std::size_t>, bool> in_additive;  // pairs of A-triples, x<y
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y) {
            if (y == x) continue;
            for (std::size_t z = x + 1; z < n; ++z) {
                if (z == y) continue;
                if (t.dist(x, z) != t.dist(x, y) + t.dist(y, z)) continue;
                const bool irr = !t.dist(x, y).is_rational() || !t.dist(y, z).is_rational() ||
                                 !t.dist(x, z).is_rational();
                if (!irr) continue;
                trace.additive_triples.push_back({x, y, z});
                auto mark = [&](std::size_t a, std::size_t b) {
                    in_additive[{std::min(a, b), std::max(a, b)}] = true;
                };
                mark(x, y);
                mark(y, z);
                mark(x, z);
            }
        }
    std::vector<Scalar> cvals;
    for (const auto& [pair, _] : in_additive) {
        const Scalar& d = t.dist(pair.first, pair.second);
        if (!d.is_rational()) cvals.push_back(d);
    }
    std::sort(cvals.begin(), cvals.end());
    cvals.erase(std::unique(cvals.begin(), cvals.end()), cvals.end());
    trace.irrational_values = cvals;

    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y) {
            if (y == x) continue;
            for (std::size_t z = 0; z < n; ++z) {
                if (z == x || z == y) continue;
                Scalar slack = t.dist(x, y) + t.dist(y, z) - t.dist(x, z);
                if (!slack.is_zero()) trace.eps1 = opt_min(trace.eps1, slack);
            }
        }
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = x + 1; y < n; ++y) {
            Scalar gap = t.dist(x, y) - t.dist(t.r(x), t.r(y));
            if (!gap.is_zero()) trace.eps2 = opt_min(trace.eps2, gap);
        }
    trace.eps0 = fold_min(eps_s, trace.eps1, trace.eps2) / Scalar(2);

    // eta: value-keyed bumps on pairs occurring in additive triples
    std::vector<Scalar> eta(n * n, Scalar(0));
    auto eta_at = [&](std::size_t i, std::size_t j) -> Scalar& { return eta[i * n + j]; };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) eta_at(i, j) = t.dist(i, j);
    auto value_index = [&](const Scalar& v) -> std::size_t {
        // 1-based position in the ascending irrational value list
        return static_cast<std::size_t>(
                   std::lower_bound(cvals.begin(), cvals.end(), v) - cvals.begin()) +
               1;
    };
    for (const auto& [pair, _] : in_additive) {
        const auto [u, v] = pair;
        const Scalar& d = t.dist(u, v);
        if (d.is_rational()) continue;
        Scalar bump = trace.eps0;
        for (std::size_t k = 0; k < value_index(d); ++k) bump = bump / Scalar(2);
        eta_at(u, v) = d + bump;
        eta_at(v, u) = eta_at(u, v);
    }
    // retraction pullback: eta(u',v') = eta(r(u'), r(v')) when the distances agree
    for (std::size_t u2 = 0; u2 < n; ++u2)
        for (std::size_t v2 = u2 + 1; v2 < n; ++v2) {
            const std::size_t u = t.r(u2), v = t.r(v2);
            if (u == u2 && v == v2) continue;
            if (t.dist(u2, v2) != t.dist(u, v)) continue;
            if (eta_at(u, v) == t.dist(u, v)) continue;  // image pair not bumped
            if (eta_at(u2, v2) != t.dist(u2, v2) && eta_at(u2, v2) != eta_at(u, v)) {
                trace.conflicts.push_back("pullback conflict at pair (" + std::to_string(u2) +
                                          "," + std::to_string(v2) + ")");
                continue;
            }
            eta_at(u2, v2) = eta_at(u, v);
            eta_at(v2, u2) = eta_at(u, v);
        }

    // Second step: rationalize the metric inside the eps5 margins.
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y) {
            if (y == x) continue;
            for (std::size_t z = 0; z < n; ++z) {
                if (z == x || z == y) continue;
                Scalar slack = eta_at(x, y) + eta_at(y, z) - eta_at(x, z);
                if (!slack.is_zero()) trace.eps3 = opt_min(trace.eps3, slack);
            }
        }
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = x + 1; y < n; ++y) {
            Scalar gap = eta_at(x, y) - eta_at(t.r(x), t.r(y));
            if (!gap.is_zero()) trace.eps4 = opt_min(trace.eps4, gap);
        }
    trace.eps5 = fold_min(eps_s / Scalar(4), trace.eps3, trace.eps4);

    std::vector<bool> in_retract_image(n, false);
    for (std::size_t i = 0; i < n; ++i) in_retract_image[t.r(i)] = true;

    std::vector<Scalar> rho(n * n, Scalar(0));
    auto rho_at = [&](std::size_t i, std::size_t j) -> Scalar& { return rho[i * n + j]; };
    const Scalar half5 = trace.eps5 / Scalar(2);
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = x + 1; y < n; ++y) {
            RationalizationTrace::PairDecision dec;
            dec.x = x;
            dec.y = y;
            dec.eta = eta_at(x, y);
            if (dec.eta.is_rational()) {
                dec.branch = RationalizationTrace::PairDecision::Branch::KeptRational;
                dec.rho = dec.eta.as_rational();
            } else if (in_retract_image[x] && in_retract_image[y]) {
                dec.branch = RationalizationTrace::PairDecision::Branch::RetractInterval;
                dec.rho = rational_in_interval(dec.eta, dec.eta + half5);
            } else {
                dec.branch = RationalizationTrace::PairDecision::Branch::NonRetractInterval;
                dec.rho = rational_in_interval(dec.eta + half5, dec.eta + trace.eps5);
            }
            rho_at(x, y) = Scalar(dec.rho);
            rho_at(y, x) = Scalar(dec.rho);
            trace.pair_decisions.push_back(std::move(dec));
        }

    // Third step: rationalize the potential, scaling only when needed.
    std::vector<Scalar> p_out(n);
    bool all_rational_p = true;
    for (std::size_t i = 0; i < n; ++i)
        if (!t.p(i).is_rational()) all_rational_p = false;
    if (all_rational_p) {
        for (std::size_t i = 0; i < n; ++i) p_out[i] = t.p(i);
    } else {
        Scalar maxp(0);
        for (std::size_t i = 0; i < n; ++i) maxp = scalar_max(maxp, t.p(i));
        Scalar lo = Scalar(1) - eps_s / (Scalar(2) * maxp);
        if (lo.sign() < 0) lo = Scalar(0);
        trace.scale_a = rational_in_interval(lo, Scalar(1));
        const Scalar a{Rat(trace.scale_a)};
        std::vector<Scalar> pp(n);
        for (std::size_t i = 0; i < n; ++i) pp[i] = a * t.p(i);
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t y = x + 1; y < n; ++y) {
                Scalar margin = Scalar(rho_at(x, y)) - scalar_abs(pp[x] - pp[y]);
                if (!margin.is_zero())
                    trace.potential_margin = opt_min(trace.potential_margin, margin);
            }
        trace.potential_delta = fold_min(eps_s, trace.potential_margin, std::nullopt) / Scalar(2);
        for (std::size_t i = 0; i < n; ++i) {
            if (pp[i].is_rational())
                p_out[i] = pp[i];
            else
                p_out[i] = Scalar(rational_in_interval(pp[i], pp[i] + trace.potential_delta));
        }
    }

    Triple out(FiniteMetricSpace(t.space().labels(), rho), t.retraction(), p_out);

    // postconditions, all exact
    if (auto rep = validate_triple(out); !rep.ok())
        throw Error("rationalize produced an invalid triple: " + rep.str());
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y) {
            if (!out.dist(x, y).is_rational() || !out.p(x).is_rational())
                throw Error("rationalize left an irrational value (internal)");
            if (out.dist(x, y) < t.dist(x, y) || out.dist(x, y) > t.dist(x, y) + eps_s)
                throw Error("rationalize broke the d <= rho <= d+eps envelope (internal)");
            if (!(scalar_abs(out.p(x) - t.p(x)) < eps_s))
                throw Error("rationalize broke |p' - p| < eps (internal)");
        }
    for (std::size_t a : frozen)
        for (std::size_t b : frozen)
            if (out.dist(a, b) != t.dist(a, b))
                throw Error("rationalize touched a frozen distance (internal)");
    for (const auto& tr : trace.additive_triples)
        if (!(out.dist(tr[0], tr[2]) < out.dist(tr[0], tr[1]) + out.dist(tr[1], tr[2])))
            throw Error("strong triangle inequality failed on an additive triple (internal)");
    return {std::move(out), std::move(trace)};
}

namespace {

/// One-point extension of a working triple by a point with prescribed
/// distances, choosing a valid retraction target for it. Tries existing
/// retract points first, then introduces a pulled-back retract point.
/// Returns the index of the new point; appends helper indices when used.
std::size_t extend_retraction_to_point(Triple& w, const std::string& label,
                                       const std::vector<Scalar>& row,
                                       std::vector<std::size_t>* helpers) {
    const std::size_t nw = w.size();
    // admissible potential interval against all existing points
    auto q_interval = [&](const Scalar& lo_extra) {
        Scalar lo = lo_extra, hi;
        bool hi_set = false;
        for (std::size_t x = 0; x < nw; ++x) {
            lo = scalar_max(lo, w.p(x) - row[x]);
            Scalar up = w.p(x) + row[x];
            if (!hi_set || up < hi) {
                hi = up;
                hi_set = true;
            }
        }
        return std::make_pair(lo, hi);
    };
    auto pick = [&](const Scalar& lo, const Scalar& hi) -> Scalar {
        if (lo == hi) return lo;
        return Scalar(rational_in_interval(lo, hi));
    };

    for (std::size_t c = 0; c < nw; ++c) {
        if (!w.is_retract_point(c)) continue;
        bool ok = true;
        for (std::size_t x = 0; x < nw && ok; ++x)
            ok = w.dist(c, w.r(x)) <= row[x];
        if (!ok) continue;
        // lo includes row[c]/2 > 0, so any picked q is positive
        auto [lo, hi] = q_interval(row[c] / Scalar(2));
        if (lo > hi) continue;
        Scalar q = pick(lo, hi);
        FiniteMetricSpace space = w.space().with_point(label, row);
        std::vector<std::size_t> r = w.retraction();
        std::vector<Scalar> p = w.potential();
        r.push_back(c);
        p.push_back(q);
        Triple cand(std::move(space), std::move(r), std::move(p));
        if (validate_triple(cand).ok()) {
            w = std::move(cand);
            return nw;
        }
    }

    // pulled-back retract point: theta(x) = min_w { d(z,w) + d(z? U w, x) }
    std::vector<Scalar> theta(nw);
    for (std::size_t x = 0; x < nw; ++x) {
        Scalar best = row[0] + w.dist(w.r(0), x);
        for (std::size_t v = 1; v < nw; ++v)
            best = scalar_min(best, row[v] + w.dist(w.r(v), x));
        theta[x] = best;
    }
    Scalar theta_z = row[0] + row[w.r(0)];
    for (std::size_t v = 1; v < nw; ++v) theta_z = scalar_min(theta_z, row[v] + row[w.r(v)]);

    // append the helper retract point first, then z
    FiniteMetricSpace space1 = w.space().with_point(label + "*", theta);
    std::vector<std::size_t> r1 = w.retraction();
    std::vector<Scalar> p1 = w.potential();
    r1.push_back(nw);
    p1.push_back(Scalar(0));
    Triple w1(std::move(space1), std::move(r1), std::move(p1));

    std::vector<Scalar> row2 = row;
    row2.push_back(theta_z);
    auto [lo, hi] = [&] {
        Scalar lo2 = theta_z / Scalar(2), hi2 = theta_z;
        for (std::size_t x = 0; x < nw + 1; ++x) {
            lo2 = scalar_max(lo2, w1.p(x) - row2[x]);
            hi2 = scalar_min(hi2, w1.p(x) + row2[x]);
        }
        return std::make_pair(lo2, hi2);
    }();
    if (lo > hi) throw Error("commuting-route extension has empty potential interval (internal)");
    Scalar q = pick(lo, hi);
    FiniteMetricSpace space2 = w1.space().with_point(label, row2);
    std::vector<std::size_t> r2 = w1.retraction();
    std::vector<Scalar> p2 = w1.potential();
    r2.push_back(nw);  // retract to the helper
    p2.push_back(q);
    Triple cand(std::move(space2), std::move(r2), std::move(p2));
    if (auto rep = validate_triple(cand); !rep.ok())
        throw Error("commuting-route extension is invalid (internal): " + rep.str());
    if (helpers) helpers->push_back(nw);
    w = std::move(cand);
    return nw + 1;
}

}  // namespace

NearbyEmbedding nearby_rational_embedding(const AmbientStage& stage,
                                          const std::vector<std::size_t>& partners,
                                          const FiniteMetricSpace& target, const Scalar& eps) {
    const std::size_t m = partners.size();
    if (m == 0) throw PreconditionError("partner list must be nonempty");
    if (target.size() != m) throw ShapeError("target size does not match partner count");
    if (eps.sign() <= 0) throw PreconditionError("eps must be positive");
    const Triple& amb = stage.triple();
    for (std::size_t i = 0; i < m; ++i) {
        if (partners[i] >= amb.size()) throw ShapeError("partner index out of range");
        for (std::size_t j = i + 1; j < m; ++j) {
            if (partners[i] == partners[j]) throw PreconditionError("partners must be distinct");
            if (!(scalar_abs(amb.dist(partners[i], partners[j]) - target.dist(i, j)) < eps))
                throw PreconditionError("partner/target distance mismatch >= eps at pair (" +
                                        std::to_string(i) + "," + std::to_string(j) + ")");
        }
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (!target.dist(i, j).is_rational())
                throw PreconditionError("target metric must be rational");

    const Scalar half = eps / Scalar(2);
    // bridge block distances: copy_i to partner b_j
    auto bridge = [&](std::size_t i, std::size_t j) -> Scalar {
        if (i == j) return half;
        Scalar best = target.dist(i, 0) + amb.dist(partners[0], partners[j]);
        for (std::size_t k = 1; k < m; ++k)
            best = scalar_min(best, target.dist(i, k) + amb.dist(partners[k], partners[j]));
        return half + best;
    };

    // grown metric: stage block intact, copies appended; cross distances go
    // through the partner set (maximal amalgamation over the bridges).
    const std::size_t ns = amb.size();
    const std::size_t ng = ns + m;
    std::vector<std::string> labels = amb.space().labels();
    for (std::size_t i = 0; i < m; ++i) labels.push_back(target.label(i) + "~");
    std::vector<Scalar> d(ng * ng, Scalar(0));
    auto at = [&](std::size_t i, std::size_t j) -> Scalar& { return d[i * ng + j]; };
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = 0; j < ns; ++j) at(i, j) = amb.dist(i, j);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) at(ns + i, ns + j) = target.dist(i, j);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t x = 0; x < ns; ++x) {
            Scalar best = bridge(i, 0) + amb.dist(partners[0], x);
            for (std::size_t k = 1; k < m; ++k)
                best = scalar_min(best, bridge(i, k) + amb.dist(partners[k], x));
            at(ns + i, x) = best;
            at(x, ns + i) = best;
        }

    NearbyEmbedding out{stage, Embedding{{}, Scalar(0)}, {}, false, Scalar(0)};

    // pattern branch: partner set closed under U, pattern 1-Lipschitz on the target
    std::vector<std::size_t> pattern(m, SIZE_MAX);
    bool closed = true;
    for (std::size_t i = 0; i < m && closed; ++i) {
        const std::size_t u = amb.r(partners[i]);
        closed = false;
        for (std::size_t j = 0; j < m; ++j)
            if (partners[j] == u) {
                pattern[i] = j;
                closed = true;
                break;
            }
    }
    if (closed)
        for (std::size_t i = 0; i < m && closed; ++i)
            for (std::size_t j = 0; j < m && closed; ++j)
                if (target.dist(pattern[i], pattern[j]) > target.dist(i, j)) closed = false;

    if (closed) {
        std::vector<std::size_t> r(ng);
        std::vector<Scalar> p(ng);
        for (std::size_t i = 0; i < ns; ++i) {
            r[i] = amb.r(i);
            p[i] = amb.p(i);
        }
        for (std::size_t i = 0; i < m; ++i) {
            r[ns + i] = ns + pattern[i];
            p[ns + i] = amb.p(partners[i]);
        }
        Triple cand(FiniteMetricSpace(labels, d), r, p);
        if (validate_triple(cand).ok()) {
            AmbientStage grown = stage;
            grown.grow(std::move(cand),
                       AbsorptionRecord{0, "embed", "pattern copy of " + std::to_string(m), 0});
            grown.bump_generation();
            out.stage = std::move(grown);
            out.pattern_copy = true;
            std::vector<std::size_t> map(m);
            for (std::size_t i = 0; i < m; ++i) map[i] = ns + i;
            out.copy = Embedding{std::move(map), Scalar(0)};
        }
    }

    if (!out.pattern_copy) {
        // per-point fallback on a working triple; copies enter one at a time
        Triple w = amb;
        std::vector<std::size_t> map(m, SIZE_MAX);
        std::vector<std::size_t> helpers;
        for (std::size_t i = 0; i < m; ++i) {
            // row of copy_i over the current working points: stage and earlier
            // copies come from the amalgam matrix; helpers via shortest path
            std::vector<Scalar> row(w.size());
            for (std::size_t x = 0; x < w.size(); ++x) {
                bool known = x < ns;
                if (!known)
                    for (std::size_t j = 0; j < i && !known; ++j) known = map[j] == x;
                if (known) {
                    // x is stage or an earlier copy: look it up in the big matrix
                    std::size_t col = x;
                    for (std::size_t j = 0; j < i; ++j)
                        if (map[j] == x) col = ns + j;
                    row[x] = at(ns + i, col);
                } else {
                    // helper point: route through non-helper points
                    Scalar best;
                    bool first = true;
                    for (std::size_t y = 0; y < w.size(); ++y) {
                        bool y_known = y < ns;
                        std::size_t col = y;
                        for (std::size_t j = 0; j < i; ++j)
                            if (map[j] == y) {
                                y_known = true;
                                col = ns + j;
                            }
                        if (!y_known) continue;
                        Scalar via = at(ns + i, col) + w.dist(y, x);
                        if (first || via < best) {
                            best = via;
                            first = false;
                        }
                    }
                    row[x] = best;
                }
            }
            std::size_t before = w.size();
            std::size_t zi = extend_retraction_to_point(w, target.label(i) + "~", row, &helpers);
            (void)before;
            map[i] = zi;
        }
        AmbientStage grown = stage;
        grown.grow(w, AbsorptionRecord{0, "embed",
                                       "per-point copy of " + std::to_string(m) + " (+" +
                                           std::to_string(helpers.size()) + " helpers)",
                                       0});
        grown.bump_generation();
        out.stage = std::move(grown);
        out.helper_points = std::move(helpers);
        out.copy = Embedding{std::move(map), Scalar(0)};
    }

    // measured displacement and exactness checks
    const Triple& g = out.stage.triple();
    Embedding copy_checked = measure_embedding(target, g.space(), out.copy.map);
    if (!copy_checked.isometric()) throw Error("copy is not isometric (internal)");
    Scalar disp(0);
    for (std::size_t i = 0; i < m; ++i)
        disp = scalar_max(disp, g.dist(partners[i], out.copy.map[i]));
    if (!(disp < eps)) throw Error("copy displacement is not < eps (internal)");
    out.max_displacement = std::move(disp);
    if (!stage.is_prefix_of(out.stage))
        throw Error("embedding changed existing stage data (internal)");
    return out;
}

}  // namespace urlab
