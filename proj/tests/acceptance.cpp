#include "reference_watkins.hpp"
#include "ttql/generators.hpp"
#include "ttql/harness.hpp"
#include "ttql/learner.hpp"
#include "ttql/metrics.hpp"
#include "ttql/oracle.hpp"
#include "ttql/theory.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace ttql;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double time_limit_s;  // 0: none
    std::function<Outcome()> body;
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

double max_abs_diff(const QTable& a, const QTable& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

Outcome contraction() {
    std::size_t contraction_fail = 0;
    std::size_t certificate_fail = 0;
    double worst_ratio = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        Rng rng = Rng(1000 + i);
        const std::size_t S = 1 + rng.next_u64() % 20;
        const std::size_t A = 1 + rng.next_u64() % 20;
        const double gamma = rng.uniform(0.05, 0.99);
        Rng gen = rng.substream(1);
        const Mdp m = random_mdp(S, A, gamma, gen);
        const double scale = 1.0 / (1.0 - gamma);
        std::vector<double> v1(S * A), v2(S * A);
        for (double& x : v1) x = rng.uniform(-scale, scale);
        for (double& x : v2) x = rng.uniform(-scale, scale);
        const QTable q1(S, A, v1), q2(S, A, v2);
        const double lhs = max_abs_diff(bellman_optimal(q1, m), bellman_optimal(q2, m));
        const double rhs = max_abs_diff(q1, q2);
        if (!(lhs <= gamma * rhs)) ++contraction_fail;
        worst_ratio = std::max(worst_ratio, lhs / (gamma * rhs));

        const auto report = solve_q_star(m, 1e-10);
        const double res = max_abs_diff(bellman_optimal(report.q_star, m), report.q_star);
        if (!(res <= (1.0 + gamma) * report.residual)) ++certificate_fail;
    }
    return {contraction_fail == 0 && certificate_fail == 0,
            "100 MDPs, contraction violations " + std::to_string(contraction_fail) +
                ", certificate violations " + std::to_string(certificate_fail) +
                ", max ||Tq1-Tq2||/(gamma||q1-q2||) " + fmt("%.6f", worst_ratio)};
}

Outcome distance_dominance() {
    std::size_t violations = 0;
    std::array<std::size_t, 3> per_axis{};
    double worst_gap = -1e300;
    for (std::uint64_t i = 0; i < 150; ++i) {
        Rng rng(5000 + i);
        const std::size_t S = 2 + rng.next_u64() % 14;
        const std::size_t A = 1 + rng.next_u64() % 8;
        const double gamma = rng.uniform(0.5, 0.9);
        const auto axis = static_cast<PerturbAxis>(i % 3);
        const double eps = axis == PerturbAxis::gamma ? rng.uniform(0.0, 0.99 - gamma)
                                                      : rng.uniform(0.0, 0.5);
        Rng gen = rng.substream(1);
        const Mdp m = random_mdp(S, A, gamma, gen);
        Rng noise = rng.substream(2);
        const Mdp p = perturb(m, {axis, eps}, noise);
        const double d = mdp_distance(m, p, 1e-10);
        const double bound = delta_tilde_bound(m, p).total;
        if (!(d <= bound + 2e-8)) ++violations;
        worst_gap = std::max(worst_gap, d - bound);
        ++per_axis[static_cast<std::size_t>(axis)];
    }
    return {violations == 0,
            "150 pairs (" + std::to_string(per_axis[0]) + " gamma, " + std::to_string(per_axis[1]) +
                " reward, " + std::to_string(per_axis[2]) + " transition), violations " +
                std::to_string(violations) + ", max distance - bound " + fmt("%.3g", worst_gap)};
}

Outcome proxy() {
    std::size_t violations = 0;
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 250; ++i) {
        Rng rng(9000 + i);
        const std::size_t S = 1 + rng.next_u64() % 15;
        const std::size_t A = 1 + rng.next_u64() % 6;
        const double gamma = rng.uniform(0.05, 0.99);
        Rng gen = rng.substream(1);
        const Mdp m = random_mdp(S, A, gamma, gen);
        const auto q_star = solve_q_star(m, 1e-11).q_star;
        const double scale = 2.0 / (1.0 - gamma);
        std::vector<double> v(S * A);
        for (double& x : v) x = rng.uniform(-scale, scale);
        const QTable q(S, A, v);
        const double lhs = mne(q, q_star);
        const double rhs = mnbe_exact(q, m) / (1.0 - gamma);
        if (!(lhs <= rhs + 2e-8)) ++violations;
        worst = std::max(worst, lhs / rhs);
    }
    return {violations == 0, "250 pairs, violations " + std::to_string(violations) +
                                 ", max mne/(mnbe/(1-gamma)) " + fmt("%.4f", worst)};
}

Outcome theory_bounds() {
    const std::vector<std::size_t> horizons{100, 1000, 10000};
    const std::vector<double> gbs{0.1, 0.3, 0.49, 0.5, 0.51, 0.7, 0.9};
    std::size_t bad = 0;
    for (const auto& row : bounds_grid(horizons, gbs))
        if (!row.sum_ok || !row.alpha_ok) ++bad;
    std::vector<std::size_t> ns;
    for (std::size_t n = 128; n <= 16384; n *= 2) ns.push_back(n);
    const double s03 = sum_sq_loglog_slope(ns, 0.3);
    const double s07 = sum_sq_loglog_slope(ns, 0.7);
    const bool slopes = std::abs(s03 + 1.0) <= 0.05 && std::abs(s07 + (2.0 - 1.4)) <= 0.05;
    return {bad == 0 && slopes, "grid violations " + std::to_string(bad) + "/21, slope(0.3) " +
                                    fmt("%.4f", s03) + " (target -1), slope(0.7) " +
                                    fmt("%.4f", s07) + " (target -0.6)"};
}

Outcome hoeffding() {
    const std::size_t n = 200;
    const std::size_t trials = 100000;
    const std::vector<double> uniform(n, 1.0 / n);
    const auto zero = weights_constant(n, 0.9, 0.0);
    const auto one = weights_constant(n, 0.9, 1.0);
    const std::vector<std::pair<const char*, const std::vector<double>*>> profiles{
        {"uniform", &uniform}, {"beta=0", &zero.w}, {"beta=1", &one.w}};
    bool ok = true;
    std::string detail;
    for (std::size_t p = 0; p < profiles.size(); ++p) {
        Rng rng = Rng(77).substream(p);
        const auto report = hoeffding_check(*profiles[p].second, trials, rng);
        detail += std::string(p ? "; " : "") + profiles[p].first + ":";
        for (std::size_t j = 0; j < 3; ++j) {
            const double d = report.deltas[j];
            const double sigma = std::sqrt(d * (1 - d) / static_cast<double>(trials));
            if (!(report.violation_rates[j] <= d + 3 * sigma)) ok = false;
            detail += " " + fmt("%.5f", report.violation_rates[j]);
        }
    }
    return {ok, "violation rates at delta 0.1/0.05/0.01 over 1e5 trials, " + detail};
}

Outcome envelope() {
    const std::size_t horizon = 5000;
    const std::size_t n = horizon + 1;
    std::size_t total = 0;
    std::size_t inside = 0;
    double worst_ratio = 0.0;
    for (std::uint64_t model = 0; model < 20; ++model) {
        Rng gen = Rng(model).substream(1);
        const Mdp m = random_mdp(20, 10, 0.9, gen);
        const auto q_star = solve_q_star(m, 1e-12).q_star;
        LearnerConfig cfg;
        cfg.horizon = horizon;
        cfg.gate = GateMode::bellman_gate;
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            Rng rng = Rng(model).substream(100 + seed);
            const auto trace = run(m, q_star, cfg, q_star, rng);
            std::vector<double> beta(n - 1);
            for (std::size_t i = 0; i < horizon; ++i) {
                const auto& rec = trace.steps[i];
                beta[i] = rec.transfer_flag ? std::clamp(rec.beta_hat, 0.0, 1.0) : 1.0;
            }
            const double bound = error_bound(n, trace.initial_mne, 0.05, m.gamma(), beta);
            const double final_mne = trace.steps.back().mne;
            ++total;
            if (final_mne <= bound) ++inside;
            worst_ratio = std::max(worst_ratio, final_mne / bound);
        }
    }
    const double frac = static_cast<double>(inside) / static_cast<double>(total);
    return {frac >= 0.95, std::to_string(inside) + "/" + std::to_string(total) +
                              " runs inside the envelope (" + fmt("%.1f", 100 * frac) +
                              "%), max final mne / bound " + fmt("%.3f", worst_ratio)};
}

Outcome reduction() {
    std::size_t identical = 0;
    for (std::uint64_t model = 0; model < 3; ++model) {
        Rng gen = Rng(40 + model).substream(1);
        const Mdp m = random_mdp(10 + 5 * model, 4 + model, 0.8 + 0.05 * model, gen);
        const auto q_star = solve_q_star(m, 1e-10).q_star;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            LearnerConfig cfg;
            cfg.horizon = 1000;
            cfg.gate = GateMode::never_transfer;
            Rng rng = Rng(seed).substream(2);
            const auto ours = trace_to_csv(run(m, std::nullopt, cfg, q_star, rng));
            const auto ref = test::reference_watkins_csv(m, q_star, 1000, Rng(seed).substream(2));
            if (ours == ref) ++identical;
        }
    }
    return {identical == 15, std::to_string(identical) + "/15 traces byte-identical (horizon 1000)"};
}

bool iqr_contains(const VariantResult& band, double x, std::size_t t) {
    return band.q25_mne[t] <= x && x <= band.q75_mne[t];
}

Outcome similarity() {
    const auto cfg = default_config(SuiteKind::similarity);
    const auto res = run_suite(cfg, {0, {}});
    const double base = res.variant("baseline").median_final_mne();
    bool ok = true;
    std::ostringstream detail;
    detail << "baseline " << fmt("%.4g", base);
    for (auto axis : {PerturbAxis::gamma, PerturbAxis::reward}) {
        std::vector<const VariantResult*> vs;
        for (const auto& v : res.variants)
            if (v.source && v.source->axis == axis) vs.push_back(&v);
        std::sort(vs.begin(), vs.end(), [](auto* a, auto* b) {
            return a->median_source_distance() < b->median_source_distance();
        });
        bool increasing = true;
        bool below = true;
        for (std::size_t i = 0; i < vs.size(); ++i) {
            if (i > 0 && !(vs[i]->median_final_mne() > vs[i - 1]->median_final_mne())) increasing = false;
            if (!(vs[i]->median_final_mne() <= base)) below = false;
        }
        detail << "; " << to_string(axis) << ":";
        for (auto* v : vs) detail << " " << fmt("%.4g", v->median_final_mne());
        detail << (increasing ? " increasing" : " NOT increasing") << (below ? ", <= baseline" : ", NOT <= baseline");
        ok = ok && increasing && below;
    }
    std::vector<const VariantResult*> ps;
    for (const auto& v : res.variants)
        if (v.source && v.source->axis == PerturbAxis::transition) ps.push_back(&v);
    const std::size_t T = cfg.horizon;
    std::size_t steps_ok = 0;
    for (std::size_t t = 0; t < T; ++t) {
        bool all = true;
        for (auto* v : ps)
            for (auto* u : ps)
                if (u != v && !iqr_contains(*u, v->median_mne[t], t)) all = false;
        if (all) ++steps_ok;
    }
    bool final_ok = true;
    for (auto* v : ps)
        for (auto* u : ps)
            if (u != v && !iqr_contains(*u, v->median_mne[T - 1], T - 1)) final_ok = false;
    detail << "; transition: medians inside every other IQR band at " << steps_ok << "/" << T
           << " steps, final step " << (final_ok ? "inside" : "outside") << " (final IQRs";
    for (auto* v : ps)
        detail << " [" << fmt("%.4g", v->q25_final_mne()) << "," << fmt("%.4g", v->q75_final_mne()) << "]";
    detail << ")";
    ok = ok && steps_ok == T;
    return {ok, detail.str()};
}

Outcome safecond() {
    const auto cfg = default_config(SuiteKind::safecond);
    const auto res = run_suite(cfg, {0, {}});
    const double base = res.variant("baseline").median_final_mne();
    const PerturbSpec near = cfg.axes.front();
    const PerturbSpec far = cfg.axes.back();
    auto pick = [&](const char* prefix, const PerturbSpec& s) -> const VariantResult& {
        for (const auto& v : res.variants)
            if (v.source && *v.source == s && v.name.rfind(prefix, 0) == 0) return v;
        throw std::logic_error("missing variant");
    };
    const auto& far_w = pick("wsc-", far);
    const auto& far_wo = pick("wosc-", far);
    const auto& near_w = pick("wsc-", near);
    const auto& near_wo = pick("wosc-", near);
    const bool far_order = far_w.median_final_mne() < far_wo.median_final_mne();
    const bool far_base = far_w.median_final_mne() <= 1.1 * base;
    const bool near_overlap = near_w.q25_final_mne() <= near_wo.q75_final_mne() &&
                              near_wo.q25_final_mne() <= near_w.q75_final_mne();
    std::ostringstream detail;
    detail << "far (" << far_w.name.substr(4) << "): W-SC " << fmt("%.4g", far_w.median_final_mne())
           << " WO-SC " << fmt("%.4g", far_wo.median_final_mne()) << " baseline " << fmt("%.4g", base)
           << "; near (" << near_w.name.substr(4) << "): W-SC IQR [" << fmt("%.4g", near_w.q25_final_mne())
           << "," << fmt("%.4g", near_w.q75_final_mne()) << "] WO-SC IQR ["
           << fmt("%.4g", near_wo.q25_final_mne()) << "," << fmt("%.4g", near_wo.q75_final_mne()) << "]";
    if (!far_order) detail << "; W-SC not below WO-SC";
    if (!far_base) detail << "; W-SC above 1.1 x baseline";
    if (!near_overlap) detail << "; near IQRs disjoint";
    return {far_order && far_base && near_overlap, detail.str()};
}

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "contraction and certified fixed point", 5, contraction},
        {2, "distance bound dominance", 60, distance_dominance},
        {3, "mne/mnbe proxy", 10, proxy},
        {4, "coefficient bounds and rates", 30, theory_bounds},
        {5, "weighted Hoeffding Monte Carlo", 60, hoeffding},
        {6, "error envelope with oracle source", 180, envelope},
        {7, "reduction to Q-learning", 0, reduction},
        {8, "similarity suite orderings", 120, similarity},
        {9, "safe condition necessity", 120, safecond},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.body();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::string timing = fmt("%.1f s", secs);
        if (c.time_limit_s > 0) {
            timing += fmt(" / %.0f s", c.time_limit_s);
            if (secs >= c.time_limit_s) {
                out.pass = false;
                out.detail += "; over time limit";
            }
        }
        if (!out.pass) ++failed;
        std::cout << (out.pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << " [" << timing
                  << "]: " << out.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
