#pragma once

#include "ttql/learner.hpp"
#include "ttql/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace ttql::test {

// Plain synchronous Q-learning written from scratch: one sampled successor per
// (s, a) in row-major order, step size 1 / (t + 1).
inline std::string reference_watkins_csv(const Mdp& m, const QTable& q_star, std::size_t horizon,
                                         Rng rng) {
    const std::size_t S = m.n_states();
    const std::size_t A = m.n_actions();
    std::vector<double> q(S * A, 0.0);
    auto vmax = [&](const std::vector<double>& table, std::size_t s) {
        double best = table[s * A];
        for (std::size_t a = 1; a < A; ++a) best = std::max(best, table[s * A + a]);
        return best;
    };
    auto errors = [&](double& e, double& be) {
        e = 0.0;
        be = 0.0;
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t a = 0; a < A; ++a) {
                double expect = 0.0;
                for (std::size_t n = 0; n < S; ++n) expect += m.transition(s, a, n) * vmax(q, n);
                const double backup = m.reward(s, a) + m.gamma() * expect;
                be = std::max(be, std::abs(q[s * A + a] - backup));
                e = std::max(e, std::abs(q[s * A + a] - q_star(s, a)));
            }
    };
    std::ostringstream out;
    out << "step,mne,mnbe,transfer_flag,beta_hat,alpha\n";
    for (std::size_t t = 1; t <= horizon; ++t) {
        const double alpha = 1.0 / static_cast<double>(t + 1);
        std::vector<double> next(S * A);
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t a = 0; a < A; ++a) {
                const auto sp = sample_next_state(m, s, a, rng);
                next[s * A + a] = (1.0 - alpha) * q[s * A + a] +
                                  alpha * (m.reward(s, a) + m.gamma() * vmax(q, sp));
            }
        q = next;
        double e = 0.0;
        double be = 0.0;
        errors(e, be);
        out << t << ',' << format_double(e) << ',' << format_double(be) << ",0,1,"
            << format_double(alpha) << '\n';
    }
    return out.str();
}

} // namespace ttql::test
