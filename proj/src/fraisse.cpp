#include "urlab/fraisse.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <numeric>

#include "urlab/errors.hpp"

namespace urlab {

std::vector<std::vector<std::size_t>> r_closed_subsets(const Triple& t, std::size_t max_size) {
    std::vector<std::vector<std::size_t>> out;
    const std::size_t n = t.size();
    std::vector<std::size_t> cur;
    // combinations of each size in lexicographic order
    for (std::size_t k = 1; k <= std::min(max_size, n); ++k) {
        std::vector<std::size_t> idx(k);
        std::iota(idx.begin(), idx.end(), 0);
        for (;;) {
            if (t.is_r_closed(idx)) out.push_back(idx);
            // next combination
            std::size_t i = k;
            while (i > 0) {
                --i;
                if (idx[i] != i + n - k) {
                    ++idx[i];
                    for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
                    break;
                }
                if (i == 0) {
                    i = SIZE_MAX;
                    break;
                }
            }
            if (i == SIZE_MAX) break;
        }
    }
    return out;
}

std::string triple_type_key(const Triple& t) {
    const std::size_t n = t.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::string best;
    do {
        // encode with perm as the new ordering
        std::vector<std::size_t> inv(n);
        for (std::size_t i = 0; i < n; ++i) inv[perm[i]] = i;
        std::string key;
        for (std::size_t a = 0; a < n; ++a) {
            key += "r" + std::to_string(perm[t.r(inv[a])]);
            key += "p" + t.p(inv[a]).str();
            for (std::size_t b = a + 1; b < n; ++b)
                key += "d" + t.dist(inv[a], inv[b]).str();
            key += ";";
        }
        if (best.empty() || key < best) best = key;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::to_string(n) + "|" + best;
}

namespace {

/// tol = 0 fast path: buckets ambient points by exact potential value.
bool commuting_exists_exact(const Triple& small, const Triple& ambient) {
    const std::size_t n = small.size();
    std::map<std::string, std::vector<std::size_t>> by_p;
    for (std::size_t i = 0; i < ambient.size(); ++i)
        by_p[ambient.p(i).str()].push_back(i);

    std::vector<std::size_t> assign(n, SIZE_MAX);
    std::vector<bool> used(ambient.size(), false);

    std::function<bool(std::size_t)> rec = [&](std::size_t x) -> bool {
        if (x == n) return true;
        auto it = by_p.find(small.p(x).str());
        if (it == by_p.end()) return false;
        for (std::size_t t : it->second) {
            if (used[t]) continue;
            bool fits = true;
            for (std::size_t j = 0; j < x && fits; ++j)
                fits = ambient.dist(assign[j], t) == small.dist(j, x);
            if (fits && small.r(x) < x)
                fits = ambient.r(t) == assign[small.r(x)];
            if (fits && small.r(x) == x) fits = ambient.r(t) == t;
            // a later point may retract to x; checked when that point is placed
            if (fits)
                for (std::size_t j = 0; j < x && fits; ++j)
                    if (small.r(j) == x) fits = ambient.r(assign[j]) == t;
            if (!fits) continue;
            assign[x] = t;
            used[t] = true;
            if (rec(x + 1)) return true;
            used[t] = false;
            assign[x] = SIZE_MAX;
        }
        return false;
    };
    return rec(0);
}

}  // namespace

bool has_commuting_embedding(const Triple& small, const Triple& ambient, const Scalar& tol) {
    if (small.size() > ambient.size()) return false;
    if (tol.is_zero()) return commuting_exists_exact(small, ambient);
    return !find_commuting_embeddings(small, ambient, tol).empty();
}

AmbientStage build_stage(const AmbientStage& stage, const StageBounds& bounds,
                         const BuildLimits& limits) {
    if (bounds.denom == 0 || bounds.diam <= 0 || bounds.sub_size == 0)
        throw PreconditionError("stage bounds must be positive");
    const auto t0 = std::chrono::steady_clock::now();
    const Triple snapshot = stage.triple();
    AmbientStage working = stage;
    std::map<std::string, bool> witnessed;  // extended-triple type -> present
    std::size_t absorbed = 0, checked = 0;

    for (const auto& subset : r_closed_subsets(snapshot, bounds.sub_size)) {
        Triple sub = snapshot.sub_triple(subset);
        for (const auto& spec : enumerate_one_point_extensions(sub, bounds.denom, bounds.diam)) {
            Triple ext = apply_extension(sub, spec, "b!");
            ++checked;
            const std::string key = triple_type_key(ext);
            auto it = witnessed.find(key);
            if (it != witnessed.end()) continue;
            if (has_commuting_embedding(ext, working.triple(), Scalar(0))) {
                witnessed[key] = true;
                continue;
            }
            if (working.size() + 1 > limits.max_points)
                throw BudgetExceededError(
                    "stage point budget exceeded",
                    "absorbed " + std::to_string(absorbed) + " of " + std::to_string(checked) +
                        " checked extensions; stage at " + std::to_string(working.size()));
            if (limits.max_wall_ms >= 0) {
                const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                    std::chrono::steady_clock::now() - t0)
                                    .count();
                if (ms > limits.max_wall_ms)
                    throw BudgetExceededError(
                        "stage wall-clock budget exceeded",
                        "absorbed " + std::to_string(absorbed) + "; stage at " +
                            std::to_string(working.size()));
            }
            // absorb the extension over the identity embedding of the sub-triple
            Correspondence shared;
            for (std::size_t k = 0; k < subset.size(); ++k)
                shared.emplace_back(subset[k], k);
            std::string label = "g" + std::to_string(working.generation()) + "." +
                                std::to_string(working.size());
            Triple ext2 = apply_extension(sub, spec, label);
            Triple grown = amalgamate_max(working.triple(), ext2, shared);
            working.grow(std::move(grown),
                         AbsorptionRecord{0, "build", "S=" + std::to_string(subset.size()) +
                                                          " +1 (" + label + ")",
                                          0});
            ++absorbed;
            witnessed[key] = true;
        }
    }
    working.bump_generation();
    return working;
}

Rat aprox_schedule_term(const Rat& eps, unsigned n) {
    Rat denom(44);
    for (unsigned k = 0; k < n; ++k) denom *= 2;
    return eps / denom;
}

Rat aprox_schedule_bound(const Rat& eps) { return Rat(21) * eps / Rat(22); }

namespace {

struct UrStarEval {
    bool ok = false;
    Scalar displacement, commutation, potential;
};

/// Bounds for a fully placed candidate (existing b-image).
UrStarEval evaluate_candidate(const Triple& amb, const UrStarCase& c, const Scalar& e2,
                              const Scalar& e5, const Scalar& e3,
                              const std::vector<std::size_t>& map_b) {
    UrStarEval ev;
    const std::size_t m = c.a.size();
    Scalar disp(0), commut(0), pot(0);
    for (std::size_t x = 0; x < m; ++x)
        disp = scalar_max(disp, amb.dist(c.i.map[x], map_b[x]));
    if (!(disp < e2)) return ev;
    for (std::size_t x = 0; x < c.b.size(); ++x) {
        commut = scalar_max(commut, amb.dist(amb.r(map_b[x]), map_b[c.b.r(x)]));
        pot = scalar_max(pot, scalar_abs(amb.p(map_b[x]) - c.b.p(x)));
    }
    if (!(commut < e5 && pot < e3)) return ev;
    ev.ok = true;
    ev.displacement = std::move(disp);
    ev.commutation = std::move(commut);
    ev.potential = std::move(pot);
    return ev;
}

}  // namespace

UrStarVerdict check_ur_star(const AmbientStage& stage, const Rat& eps, const UrStarCase& c,
                            const UrStarBudget& budget) {
    if (eps <= 0) throw PreconditionError("eps must be positive");
    const Triple& amb = stage.triple();
    const std::size_t m = c.a.size();
    if (c.b.size() != m + 1) throw ShapeError("B must be A plus one point");
    if (auto rep = validate_triple(c.a); !rep.ok())
        throw PreconditionError("case triple A invalid: " + rep.str());
    if (auto rep = validate_triple(c.b); !rep.ok())
        throw PreconditionError("case triple B invalid: " + rep.str());
    for (std::size_t x = 0; x < m; ++x) {
        if (c.b.r(x) != c.a.r(x) || c.b.p(x) != c.a.p(x))
            throw PreconditionError("B does not extend A (retraction/potential)");
        for (std::size_t y = 0; y < m; ++y)
            if (c.b.dist(x, y) != c.a.dist(x, y))
                throw PreconditionError("B does not extend A (metric)");
    }
    for (std::size_t x = 0; x < c.b.size(); ++x) {
        if (!c.b.p(x).is_rational())
            throw PreconditionError("B must be a rational triple (potential)");
        for (std::size_t y = 0; y < c.b.size(); ++y)
            if (!c.b.dist(x, y).is_rational())
                throw PreconditionError("B must be a rational triple (metric)");
    }
    const Scalar e{Rat(eps)};
    DiscrepancyReport din = discrepancy(amb, c.i, c.a);
    if (!(din.commutation < e && din.potential < e))
        throw PreconditionError("case embedding discrepancy is not < eps");
    const Scalar e2 = Scalar(2) * e, e5 = Scalar(5) * e, e3 = Scalar(3) * e;

    UrStarVerdict verdict;

    // candidate stage points for each A-slot: within the 2eps displacement ball
    std::vector<std::vector<std::size_t>> cand(m);
    for (std::size_t x = 0; x < m; ++x)
        for (std::size_t t = 0; t < amb.size(); ++t)
            if (amb.dist(c.i.map[x], t) < e2) cand[x].push_back(t);

    std::vector<std::size_t> assign(m + 1, SIZE_MAX);
    std::vector<bool> used(amb.size(), false);
    bool out_of_budget = false;

    std::function<bool(std::size_t)> place = [&](std::size_t x) -> bool {
        if (verdict.candidates_tried >= budget.max_candidates) {
            out_of_budget = true;
            return false;
        }
        if (x == m) {
            ++verdict.candidates_tried;
            // existing witnesses for the b-image
            for (std::size_t z = 0; z < amb.size(); ++z) {
                if (used[z]) continue;
                bool fits = true;
                for (std::size_t j = 0; j < m && fits; ++j)
                    fits = amb.dist(assign[j], z) == c.b.dist(j, m);
                if (!fits) continue;
                assign[m] = z;
                UrStarEval ev = evaluate_candidate(amb, c, e2, e5, e3, assign);
                if (ev.ok) {
                    verdict.success = true;
                    verdict.i_prime = Embedding{assign, Scalar(0)};
                    verdict.displacement = ev.displacement;
                    verdict.commutation = ev.commutation;
                    verdict.potential = ev.potential;
                    verdict.note = "existing witness";
                    return true;
                }
            }
            assign[m] = SIZE_MAX;
            if (!budget.allow_virtual) return false;
            // virtual witness: pinned one-point extension over the r-closure of the image
            std::vector<std::size_t> anchor(assign.begin(), assign.begin() + m);
            for (std::size_t k = 0; k < anchor.size(); ++k) {
                const std::size_t u = amb.r(anchor[k]);
                if (std::find(anchor.begin(), anchor.end(), u) == anchor.end())
                    anchor.push_back(u);
            }
            Triple sub = amb.sub_triple(anchor);
            std::vector<Scalar> f(anchor.size());
            for (std::size_t k = 0; k < anchor.size(); ++k) {
                if (k < m) {
                    f[k] = c.b.dist(k, m);
                    continue;
                }
                Scalar best = c.b.dist(0, m) + amb.dist(assign[0], anchor[k]);
                for (std::size_t j = 1; j < m; ++j)
                    best = scalar_min(best, c.b.dist(j, m) + amb.dist(assign[j], anchor[k]));
                f[k] = best;
            }
            ExtensionSpec spec;
            spec.base = sub;
            spec.f = f;
            if (c.b.r(m) == m) {
                spec.mode = ExtensionSpec::Mode::NewRetractPoint;
                spec.new_potential = Scalar(0);
            } else {
                spec.mode = ExtensionSpec::Mode::AttachTo;
                // the attach target is the image of r'(b); must be in the anchor
                const std::size_t target = assign[c.b.r(m)];
                auto it = std::find(anchor.begin(), anchor.end(), target);
                spec.attach_to = static_cast<std::size_t>(it - anchor.begin());
                spec.new_potential = c.b.p(m);
            }
            if (extension_spec_error(spec)) return false;
            // bounds: the virtual point commutes and matches its potential by
            // construction; A-part bounds are measured on existing points
            Scalar disp(0), commut(0), pot(0);
            for (std::size_t x2 = 0; x2 < m; ++x2) {
                disp = scalar_max(disp, amb.dist(c.i.map[x2], assign[x2]));
                commut = scalar_max(commut,
                                    amb.dist(amb.r(assign[x2]), assign[c.b.r(x2)]));
                pot = scalar_max(pot, scalar_abs(amb.p(assign[x2]) - c.b.p(x2)));
            }
            if (!(disp < e2 && commut < e5 && pot < e3)) return false;
            assign[m] = amb.size();  // sentinel for the virtual point
            verdict.success = true;
            verdict.virtual_point = true;
            verdict.i_prime = Embedding{assign, Scalar(0)};
            verdict.anchor = anchor;
            verdict.anchor_f = f;
            verdict.displacement = disp;
            verdict.commutation = commut;
            verdict.potential = pot;
            verdict.note = "virtual one-point extension";
            return true;
        }
        for (std::size_t t : cand[x]) {
            if (used[t]) continue;
            bool fits = true;
            for (std::size_t j = 0; j < x && fits; ++j)
                fits = amb.dist(assign[j], t) == c.b.dist(j, x);
            if (!fits) continue;
            assign[x] = t;
            used[t] = true;
            if (place(x + 1)) return true;
            used[t] = false;
            assign[x] = SIZE_MAX;
            if (out_of_budget) return false;
        }
        return false;
    };

    if (!place(0)) {
        verdict.exhausted = true;
        verdict.note = out_of_budget ? "candidate budget exhausted" : "search space exhausted";
    }
    return verdict;
}

StepReport aprox_step(const AmbientStage& stage, const StepInputs& in, const Rat& eps_n) {
    if (eps_n <= 0) throw PreconditionError("eps_n must be positive");
    const Scalar e_n{Rat(eps_n)};
    const Rat eps_np1 = eps_n / 2;  // the fixed geometric schedule
    const Scalar e_np1{Rat(eps_np1)};
    const std::size_t m1 = in.b.size();
    if (m1 < 2) throw PreconditionError("B must have a nonempty A-part plus b");
    const std::size_t m = m1 - 1;

    auto phase = [](const std::string& name, const std::string& what) -> Error {
        return Error("aprox_step[" + name + "]: " + what);
    };

    StepReport rep;
    // ---- input validation: conditions (i)-(vi) at eps_n ----
    try {
        if (auto r = validate_triple(in.b); !r.ok()) throw PreconditionError(r.str());
        if (auto r = validate_triple(in.b_n); !r.ok()) throw PreconditionError(r.str());
        if (in.b_n.size() != m1) throw PreconditionError("B_n/B size mismatch");
        for (std::size_t x = 0; x < m1; ++x) {
            if (in.b_n.r(x) != in.b.r(x))
                throw PreconditionError("retraction patterns differ (iii)");
            if (!in.b_n.p(x).is_rational())
                throw PreconditionError("B_n must be rational");
            if (scalar_abs(in.b_n.p(x) - in.b.p(x)) > e_n / Scalar(2))
                throw PreconditionError("potential difference exceeds eps_n/2 (iv)");
            for (std::size_t y = x + 1; y < m1; ++y) {
                if (!in.b_n.dist(x, y).is_rational())
                    throw PreconditionError("B_n must be rational");
                if (!(scalar_abs(in.b_n.dist(x, y) - in.b.dist(x, y)) < e_n / Scalar(2)))
                    throw PreconditionError("metric difference not < eps_n/2 (i)");
            }
        }
        for (std::size_t x = 0; x < m; ++x)
            if (in.b.r(x) >= m) throw PreconditionError("A is not r-closed in B");
        for (std::size_t i2 = 0; i2 < stage.size(); ++i2) {
            if (!stage.triple().p(i2).is_rational())
                throw PreconditionError("stage must be rational");
            for (std::size_t j2 = 0; j2 < stage.size(); ++j2)
                if (!stage.triple().dist(i2, j2).is_rational())
                    throw PreconditionError("stage must be rational");
        }
        Triple a_part = in.b.sub_triple([&] {
            std::vector<std::size_t> v(m);
            std::iota(v.begin(), v.end(), 0);
            return v;
        }());
        DiscrepancyReport di = discrepancy(stage.triple(), in.i, a_part);
        if (!di.is_exact()) throw PreconditionError("i must commute exactly");
        DiscrepancyReport dj = discrepancy(stage.triple(), in.j_n, in.b_n);
        if (!(dj.commutation < Scalar(5) * e_n && dj.potential < Scalar(3) * e_n))
            throw PreconditionError("j_n discrepancy is not < (5eps, 3eps) (vi)");
        rep.j_commutation = dj.commutation;
        rep.j_potential = dj.potential;
        for (std::size_t x = 0; x < m; ++x)
            if (!(stage.triple().dist(in.j_n.map[x], in.i.map[x]) <
                  Scalar(5) * e_n / Scalar(2)))
                throw PreconditionError("j_n is not 5eps/2-close to i on A (v)");
    } catch (const std::exception& ex) {
        throw phase("preconditions", ex.what());
    }

    // ---- 1. commuting completion of j_n ----
    CompletionResult comp = [&] {
        try {
            return commuting_completion(stage.triple(), in.j_n, in.b_n, Scalar(5) * e_n);
        } catch (const std::exception& ex) {
            throw phase("completion", ex.what());
        }
    }();
    rep.completion_added = comp.triple.size() - m1;

    // ---- 2. fused union Y of i[A] and the completed image ----
    std::vector<std::size_t> ylist;  // stage indices
    for (std::size_t x = 0; x < m; ++x) ylist.push_back(in.i.map[x]);
    for (std::size_t x = 0; x < comp.embedding.map.size(); ++x) {
        const std::size_t s = comp.embedding.map[x];
        if (std::find(ylist.begin(), ylist.end(), s) == ylist.end()) ylist.push_back(s);
    }
    auto y_pos = [&](std::size_t stage_idx) {
        return static_cast<std::size_t>(
            std::find(ylist.begin(), ylist.end(), stage_idx) - ylist.begin());
    };
    std::vector<std::size_t> a_slot(m);
    for (std::size_t x = 0; x < m; ++x) a_slot[x] = y_pos(in.i.map[x]);
    const std::size_t bn_slot = y_pos(comp.embedding.map[m]);
    for (std::size_t x = 0; x < m; ++x)
        if (bn_slot == a_slot[x])
            throw phase("union", "b_n image collides with the A image");
    Triple F = stage.triple().sub_triple(ylist);

    // ---- 3. maximal-amalgam row of b over Y, through the A image ----
    std::vector<Scalar> g_b(ylist.size());
    for (std::size_t y = 0; y < ylist.size(); ++y) {
        Scalar best = in.b.dist(0, m) + F.dist(a_slot[0], y);
        for (std::size_t j = 1; j < m; ++j)
            best = scalar_min(best, in.b.dist(j, m) + F.dist(a_slot[j], y));
        g_b[y] = best;
    }

    // ---- 4. minimal-amalgam bridge g'_n(b, b_n) ----
    Scalar g_prime(0);
    for (std::size_t y = 0; y < ylist.size(); ++y) {
        if (y == bn_slot) continue;
        g_prime = scalar_max(g_prime, scalar_abs(g_b[y] - F.dist(y, bn_slot)));
    }
    rep.g_prime_b_bn = g_prime;
    rep.claim_g_ok = g_prime < Scalar(25) * e_n / Scalar(2);
    rep.fused_b = g_prime.is_zero();

    // ---- 5. the union triple and its regularization (rho_n) ----
    Triple T;
    std::size_t b_slot;
    if (rep.fused_b) {
        T = F;
        b_slot = bn_slot;
        rep.rho_b_bn = Scalar(0);
    } else {
        std::vector<std::string> labels = F.space().labels();
        labels.push_back(in.b.space().label(m) + "!");
        const std::size_t nt = ylist.size() + 1;
        std::vector<Scalar> d(nt * nt, Scalar(0));
        for (std::size_t i2 = 0; i2 < ylist.size(); ++i2)
            for (std::size_t j2 = 0; j2 < ylist.size(); ++j2)
                d[i2 * nt + j2] = F.dist(i2, j2);
        for (std::size_t y = 0; y < ylist.size(); ++y) {
            Scalar v = (y == bn_slot) ? g_prime : g_b[y];
            d[y * nt + (nt - 1)] = v;
            d[(nt - 1) * nt + y] = v;
        }
        std::vector<std::size_t> rbar(nt);
        std::vector<Scalar> pbar(nt);
        for (std::size_t y = 0; y < ylist.size(); ++y) {
            rbar[y] = F.r(y);
            pbar[y] = F.p(y);
        }
        rbar[nt - 1] = in.b.r(m) == m ? nt - 1 : a_slot[in.b.r(m)];
        pbar[nt - 1] = in.b.p(m);
        FiniteMetricSpace rho = [&] {
            try {
                return max_metric_regularize(labels, std::move(d), rbar, pbar);
            } catch (const std::exception& ex) {
                throw phase("regularize", ex.what());
            }
        }();
        T = Triple(rho, rbar, pbar);
        b_slot = nt - 1;
        rep.rho_b_bn = T.dist(b_slot, bn_slot);
    }
    rep.claim_rho_ok = rep.rho_b_bn < Scalar(35) * e_n / Scalar(2);
    if (auto r = validate_triple(T); !r.ok()) throw phase("rho", r.str());

    // ---- 6. rationalize with the Y block frozen ----
    std::vector<std::size_t> frozen(ylist.size());
    std::iota(frozen.begin(), frozen.end(), 0);
    auto [T1, trace] = [&] {
        try {
            return rationalize_triple(T, eps_np1 / 2, frozen);
        } catch (const std::exception& ex) {
            throw phase("rationalize", ex.what());
        }
    }();
    Scalar shift(0);
    for (std::size_t i2 = 0; i2 < T.size(); ++i2)
        for (std::size_t j2 = i2 + 1; j2 < T.size(); ++j2)
            shift = scalar_max(shift, T1.dist(i2, j2) - T.dist(i2, j2));
    rep.rmc_max_shift = shift;

    // ---- 7. nearby rational embedding of the Y part ----
    FiniteMetricSpace target = T1.space().restriction(frozen);
    NearbyEmbedding ne = [&] {
        try {
            return nearby_rational_embedding(stage, ylist, target, e_np1);
        } catch (const std::exception& ex) {
            throw phase("embed", ex.what());
        }
    }();
    rep.h_displacement = ne.max_displacement;
    Triple a_star = T1.sub_triple(frozen);
    DiscrepancyReport dh = discrepancy(ne.stage.triple(), ne.copy, a_star);
    rep.h_commutation = dh.commutation;
    rep.h_potential = dh.potential;
    if (!(dh.commutation < e_np1 && dh.potential < e_np1))
        throw phase("embed", "copy discrepancy is not < eps_{n+1}");

    // ---- 8. approximate-extension search for the full rationalized triple ----
    AmbientStage stage_out = ne.stage;
    std::vector<std::size_t> jp1;  // images of the B_{n+1} slots
    if (rep.fused_b) {
        rep.urstar.success = true;
        rep.urstar.note = "fused: b realized by b_n's image";
        rep.urstar.i_prime = ne.copy;
        rep.urstar.displacement = Scalar(0);
        rep.urstar.commutation = dh.commutation;
        rep.urstar.potential = dh.potential;
        for (std::size_t x = 0; x < m; ++x) jp1.push_back(ne.copy.map[a_slot[x]]);
        jp1.push_back(ne.copy.map[b_slot]);
    } else {
        UrStarCase c{a_star, ne.copy, T1};
        rep.urstar = [&] {
            try {
                return check_ur_star(ne.stage, eps_np1, c, UrStarBudget{});
            } catch (const std::exception& ex) {
                throw phase("ur-star", ex.what());
            }
        }();
        if (!rep.urstar.success) throw phase("ur-star", "search exhausted: " + rep.urstar.note);
        std::size_t b_image = rep.urstar.i_prime.map[T1.size() - 1];
        if (rep.urstar.virtual_point) {
            // realize the virtual witness so the chain sees an actual image
            Triple sub = ne.stage.triple().sub_triple(rep.urstar.anchor);
            ExtensionSpec spec;
            spec.base = sub;
            spec.f = rep.urstar.anchor_f;
            if (T1.r(b_slot) == b_slot) {
                spec.mode = ExtensionSpec::Mode::NewRetractPoint;
                spec.new_potential = Scalar(0);
            } else {
                spec.mode = ExtensionSpec::Mode::AttachTo;
                const std::size_t tgt = rep.urstar.i_prime.map[T1.r(b_slot)];
                spec.attach_to = static_cast<std::size_t>(
                    std::find(rep.urstar.anchor.begin(), rep.urstar.anchor.end(), tgt) -
                    rep.urstar.anchor.begin());
                spec.new_potential = T1.p(b_slot);
            }
            Triple ext = apply_extension(sub, spec, "b" + std::to_string(ne.stage.size()));
            auto [grown, emb] = absorb(ne.stage, ext, [&] {
                std::vector<std::size_t> dom(rep.urstar.anchor.size());
                std::iota(dom.begin(), dom.end(), 0);
                return dom;
            }(), rep.urstar.anchor);
            stage_out = std::move(grown);
            b_image = emb.map[rep.urstar.anchor.size()];
        }
        for (std::size_t x = 0; x < m; ++x)
            jp1.push_back(rep.urstar.i_prime.map[a_slot[x]]);
        jp1.push_back(b_image);
    }

    // ---- 9. glue the rationalized copy onto the chain at eps_{n+1}/2 ----
    std::vector<std::size_t> fresh_slots = a_slot;
    fresh_slots.push_back(b_slot);
    Triple fresh = [&] {
        try {
            return T1.sub_triple(fresh_slots);
        } catch (const std::exception& ex) {
            throw phase("glue", std::string("B_{n+1} part is not r-closed: ") + ex.what());
        }
    }();
    std::vector<std::size_t> whole(m1);
    std::iota(whole.begin(), whole.end(), 0);
    rep.chain_out = [&] {
        try {
            return glue_epsilon_copy(in.b, whole, fresh, e_np1 / Scalar(2));
        } catch (const std::exception& ex) {
            throw phase("glue", ex.what());
        }
    }();
    rep.glue_bridge = rep.chain_out.dist(0, m1);
    rep.stage_out = std::move(stage_out);
    rep.chain_copy.resize(m1);
    std::iota(rep.chain_copy.begin(), rep.chain_copy.end(), m1);
    (void)jp1;
    return rep;
}

GameState new_game(const AmbientStage& stage) {
    const auto retract = stage.triple().retract_points();
    if (retract.empty()) throw PreconditionError("stage has no retract point");
    FiniteMetricSpace space({"x0"}, {Scalar(0)});
    Triple x0(std::move(space), {0}, {Scalar(0)});
    GameState gs;
    gs.stage = stage;
    gs.chain.push_back(std::move(x0));
    gs.maps.push_back(Embedding{{retract.front()}, Scalar(0)});
    return gs;
}

GameState adam_move(GameState gs, const Triple& eve) {
    const Triple& head = gs.chain.back();
    // eve extends the chain head exactly
    if (eve.size() < head.size()) throw PreconditionError("eve must extend the chain head");
    for (std::size_t x = 0; x < head.size(); ++x) {
        if (eve.r(x) != head.r(x) || eve.p(x) != head.p(x))
            throw PreconditionError("eve changed the chain head (retraction/potential)");
        for (std::size_t y = 0; y < head.size(); ++y)
            if (eve.dist(x, y) != head.dist(x, y))
                throw PreconditionError("eve changed the chain head (metric)");
    }
    if (auto r = validate_triple(eve); !r.ok())
        throw PreconditionError("eve's triple is invalid: " + r.str());

    // absorb eve's triple, extending the current embedding
    std::vector<std::size_t> dom(head.size());
    std::iota(dom.begin(), dom.end(), 0);
    auto [stage1, f_eve] = absorb(gs.stage, eve, dom, gs.maps.back().map);
    gs.stage = std::move(stage1);

    GameRound round;
    round.cursor = gs.cursor;
    const Triple& amb = gs.stage.triple();

    if (gs.cursor >= amb.size()) {
        // nothing to cover at this cursor; Eve's move still enters the chain
        round.covered = true;
        gs.chain.push_back(eve);
        gs.maps.push_back(f_eve);
        gs.rounds.push_back(round);
        return gs;
    }
    const std::size_t xk = gs.cursor;
    bool covered = false;
    for (std::size_t v : f_eve.map)
        if (v == xk) covered = true;

    if (covered) {
        round.covered = true;
        gs.chain.push_back(eve);
        gs.maps.push_back(f_eve);
    } else {
        const std::size_t bk = amb.r(xk);
        std::size_t bk_pre = SIZE_MAX;
        for (std::size_t x = 0; x < f_eve.map.size(); ++x)
            if (f_eve.map[x] == bk) bk_pre = x;

        Triple cur = eve;
        std::vector<std::size_t> map = f_eve.map;
        // y_k pulled back from x_k
        {
            std::vector<Scalar> row(cur.size());
            for (std::size_t x = 0; x < cur.size(); ++x) row[x] = amb.dist(map[x], xk);
            FiniteMetricSpace sp = cur.space().with_point("y" + std::to_string(gs.cursor), row);
            std::vector<std::size_t> r = cur.retraction();
            std::vector<Scalar> p = cur.potential();
            const std::size_t yk = cur.size();
            std::size_t ry;
            if (bk == xk)
                ry = yk;  // the cursor point is itself a retract point
            else if (bk_pre != SIZE_MAX)
                ry = bk_pre;
            else
                ry = yk + 1;  // a_k appended next
            r.push_back(ry);
            p.push_back(amb.p(xk));
            map.push_back(xk);
            if (bk != xk && bk_pre == SIZE_MAX) {
                std::vector<Scalar> row2(yk + 1);
                for (std::size_t x = 0; x < yk; ++x) row2[x] = amb.dist(map[x], bk);
                row2[yk] = amb.dist(xk, bk);
                sp = sp.with_point("a" + std::to_string(gs.cursor), row2);
                r.push_back(yk + 1);
                p.push_back(Scalar(0));
                map.push_back(bk);
                round.added = 2;
            } else {
                round.added = 1;
            }
            cur = Triple(std::move(sp), std::move(r), std::move(p));
        }
        if (auto rchk = validate_triple(cur); !rchk.ok())
            throw Error("adam's pullback triple is invalid (internal): " + rchk.str());
        Embedding f_new{std::move(map), Scalar(0)};
        DiscrepancyReport d = discrepancy(amb, f_new, cur);
        if (!d.is_exact()) throw Error("adam's embedding does not commute (internal)");
        gs.chain.push_back(std::move(cur));
        gs.maps.push_back(std::move(f_new));
    }
    ++gs.cursor;
    gs.rounds.push_back(round);
    return gs;
}

GameState play_game(const AmbientStage& stage, const std::vector<ExtensionSpec>& script,
                    std::size_t rounds) {
    GameState gs = new_game(stage);
    for (std::size_t round = 0; round < rounds; ++round) {
        Triple eve = gs.chain.back();
        if (round < script.size()) {
            ExtensionSpec spec = script[round];
            spec.base = eve;  // scripts target the current chain head
            try {
                eve = apply_extension(eve, spec, "e" + std::to_string(round));
            } catch (const std::exception& ex) {
                throw SpecError("invalid script entry at round " + std::to_string(round) + ": " +
                                ex.what());
            }
        }
        gs = adam_move(std::move(gs), eve);
    }
    return gs;
}

std::optional<std::vector<std::size_t>> find_equivariant_isometry(const Triple& t,
                                                                  const Triple& u) {
    if (t.size() != u.size()) return std::nullopt;
    const std::size_t n = t.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            if (perm[t.r(i)] != u.r(perm[i])) ok = false;
            if (ok && t.p(i) != u.p(perm[i])) ok = false;
            for (std::size_t j = i + 1; j < n && ok; ++j)
                if (t.dist(i, j) != u.dist(perm[i], perm[j])) ok = false;
        }
        if (ok) return perm;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::nullopt;
}

}  // namespace urlab
