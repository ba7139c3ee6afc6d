#include "hetmap/simplex.hpp"

#include <algorithm>
#include <cmath>

namespace hetmap {

Simplex::Simplex(const MilpModel& model) {
    n_ = static_cast<int>(model.vars.size());
    m_ = static_cast<int>(model.cons.size());
    N_ = n_ + m_;

    a_.assign(static_cast<size_t>(m_) * n_, 0.0);
    b_.assign(m_, 0.0);
    lo_.assign(N_, 0.0);
    hi_.assign(N_, kInf);
    cost_.assign(N_, 0.0);

    for (const MilpVar& v : model.vars) {
        lo_[v.id] = v.lo;
        hi_[v.id] = v.hi;
    }
    for (const auto& [var, coeff] : model.objective) cost_[var] += coeff;

    // rows normalized so every slack has bounds [0, inf) or [0, 0]
    for (int r = 0; r < m_; ++r) {
        const MilpConstraint& c = model.cons[r];
        double sign = c.sense == MilpConstraint::Sense::GE ? -1.0 : 1.0;
        for (const auto& [var, coeff] : c.terms)
            a_[static_cast<size_t>(r) * n_ + var] += sign * coeff;
        b_[r] = sign * c.rhs;
        int slack = n_ + r;
        lo_[slack] = 0.0;
        hi_[slack] = c.sense == MilpConstraint::Sense::EQ ? 0.0 : kInf;
    }
    model_lo_ = lo_;
    model_hi_ = hi_;
}

void Simplex::set_var_bounds(int var, double lo, double hi) {
    double old = val_.empty() ? 0.0 : val_[var];
    lo_[var] = lo;
    hi_[var] = hi;
    if (!has_basis_) return;
    if (state_[var] == St::Basic) return; // dual pass will restore feasibility
    double nv = state_[var] == St::Lower ? lo : hi;
    if (state_[var] == St::Upper && is_inf(hi)) {
        state_[var] = St::Lower;
        nv = lo;
    }
    if (nv != old) {
        val_[var] = nv;
        for (int r = 0; r < m_; ++r) xb_[r] -= tab(r, var) * (nv - old);
    }
}

void Simplex::reset_var_bounds() {
    for (int j = 0; j < n_; ++j)
        if (lo_[j] != model_lo_[j] || hi_[j] != model_hi_[j])
            set_var_bounds(j, model_lo_[j], model_hi_[j]);
}

void Simplex::load_start_basis() {
    tab_.assign(static_cast<size_t>(m_) * N_, 0.0);
    basis_.assign(m_, 0);
    state_.assign(N_, St::Lower);
    val_.assign(N_, 0.0);
    xb_.assign(m_, 0.0);
    d_ = cost_;

    for (int r = 0; r < m_; ++r) {
        for (int j = 0; j < n_; ++j)
            tab(r, j) = a_[static_cast<size_t>(r) * n_ + j];
        tab(r, n_ + r) = 1.0;
        basis_[r] = n_ + r;
        state_[n_ + r] = St::Basic;
    }
    for (int j = 0; j < n_; ++j) {
        state_[j] = St::Lower;
        val_[j] = lo_[j];
    }
    compute_xb();
    has_basis_ = true;
    last_factor_ = iters_;
    degen_streak_ = 0;
}

void Simplex::compute_xb() {
    for (int r = 0; r < m_; ++r) {
        double v = b_[r];
        for (int j = 0; j < n_; ++j)
            v -= a_[static_cast<size_t>(r) * n_ + j] * val_[j];
        xb_[r] = v;
    }
}

bool Simplex::refactorize() {
    // Rebuild tableau, basic values, and reduced costs for the current basis
    // from the original rows. Incremental updates drift when a pivot element
    // is tiny (everything in its row is amplified by 1/pivot), and drifted
    // data can stall pricing or fake infeasibility; a rebuild restores exact
    // rows for the very same basis. Returns false if the basis is too close
    // to singular to rebuild, in which case the state is left untouched.
    const int W = N_ + 1; // columns of [A | I | b]
    std::vector<double> t(static_cast<size_t>(m_) * W, 0.0);
    for (int r = 0; r < m_; ++r) {
        double* row = &t[static_cast<size_t>(r) * W];
        for (int j = 0; j < n_; ++j) row[j] = a_[static_cast<size_t>(r) * n_ + j];
        row[n_ + r] = 1.0;
        row[N_] = b_[r];
    }
    const std::vector<int> vars = basis_;
    std::vector<char> used(m_, 0);
    std::vector<int> row_of(m_, -1);
    for (size_t k = 0; k < vars.size(); ++k) {
        int j = vars[k];
        int pr = -1;
        double pmax = 0.0;
        for (int r = 0; r < m_; ++r) {
            if (used[r]) continue;
            double v = std::abs(t[static_cast<size_t>(r) * W + j]);
            if (v > pmax) {
                pmax = v;
                pr = r;
            }
        }
        if (pr < 0 || pmax <= kPivTol) return false;
        used[pr] = 1;
        row_of[k] = pr;
        double* prow = &t[static_cast<size_t>(pr) * W];
        double inv = 1.0 / prow[j];
        for (int c = 0; c < W; ++c) prow[c] *= inv;
        prow[j] = 1.0;
        for (int r = 0; r < m_; ++r) {
            if (r == pr) continue;
            double* rrow = &t[static_cast<size_t>(r) * W];
            double f = rrow[j];
            if (f == 0.0) continue;
            for (int c = 0; c < W; ++c) rrow[c] -= f * prow[c];
            rrow[j] = 0.0;
        }
    }
    // basic variables may land on different rows than before; that is just a
    // row permutation of the same basis
    for (size_t k = 0; k < vars.size(); ++k) basis_[row_of[k]] = vars[k];
    for (int r = 0; r < m_; ++r) {
        const double* row = &t[static_cast<size_t>(r) * W];
        double* out = &tab_[static_cast<size_t>(r) * N_];
        double v = row[N_]; // B^{-1} b
        for (int j = 0; j < N_; ++j) {
            out[j] = row[j];
            if (state_[j] != St::Basic && val_[j] != 0.0) v -= row[j] * val_[j];
        }
        xb_[r] = v;
    }
    d_ = cost_;
    for (int r = 0; r < m_; ++r) {
        double f = d_[basis_[r]];
        if (f == 0.0) continue;
        const double* row = &tab_[static_cast<size_t>(r) * N_];
        for (int j = 0; j < N_; ++j) d_[j] -= f * row[j];
        d_[basis_[r]] = 0.0;
    }
    last_factor_ = iters_;
    return true;
}

double Simplex::infeasibility() const {
    // counts the same violations phase1_costs prices: anything within the
    // feasibility band is treated as on-bound
    double total = 0.0;
    for (int r = 0; r < m_; ++r) {
        int i = basis_[r];
        if (xb_[r] < lo_[i] - kTol) total += lo_[i] - xb_[r];
        else if (xb_[r] > hi_[i] + kTol) total += xb_[r] - hi_[i];
    }
    return total;
}

void Simplex::phase1_costs(std::vector<double>& d1) const {
    d1.assign(N_, 0.0);
    for (int r = 0; r < m_; ++r) {
        int i = basis_[r];
        double s;
        if (xb_[r] < lo_[i] - kTol) s = 1.0;       // below: d1 += T row
        else if (xb_[r] > hi_[i] + kTol) s = -1.0; // above: d1 -= T row
        else continue;
        const double* row = &tab_[static_cast<size_t>(r) * N_];
        for (int j = 0; j < N_; ++j) d1[j] += s * row[j];
    }
}

void Simplex::pivot(int row, int enter, double move) {
    // entering variable moves by `move` away from its current bound
    for (int r = 0; r < m_; ++r) xb_[r] -= tab(r, enter) * move;

    int leave = basis_[row];
    double lv = xb_[row];
    // snap the leaving variable to the nearer of its bounds
    if (!is_inf(hi_[leave]) &&
        std::abs(lv - hi_[leave]) < std::abs(lv - lo_[leave])) {
        val_[leave] = hi_[leave];
        state_[leave] = St::Upper;
    } else {
        val_[leave] = lo_[leave];
        state_[leave] = St::Lower;
    }
    xb_[row] = val_[enter] + move;
    basis_[row] = enter;
    state_[enter] = St::Basic;

    double piv = tab(row, enter);
    double* prow = &tab_[static_cast<size_t>(row) * N_];
    double inv = 1.0 / piv;
    for (int j = 0; j < N_; ++j) prow[j] *= inv;
    for (int r = 0; r < m_; ++r) {
        if (r == row) continue;
        double f = tab(r, enter);
        if (f == 0.0) continue;
        double* rrow = &tab_[static_cast<size_t>(r) * N_];
        for (int j = 0; j < N_; ++j) rrow[j] -= f * prow[j];
        rrow[enter] = 0.0; // exact
    }
    double f = d_[enter];
    if (f != 0.0) {
        for (int j = 0; j < N_; ++j) d_[j] -= f * prow[j];
        d_[enter] = 0.0;
    }
    ++iters_;
}

Simplex::Status Simplex::primal_loop(bool phase1, long max_iter) {
    std::vector<double> d1;
    for (long it = 0; it < max_iter; ++it) {
        if (phase1 && iters_ - last_factor_ >= 512) refactorize();
        const std::vector<double>* price = &d_;
        if (phase1) {
            if (infeasibility() <= kTol) return Status::Optimal;
            phase1_costs(d1);
            price = &d1;
        }
        bool bland = degen_streak_ > 200;
        int enter = -1;
        double best = 0.0;
        for (int j = 0; j < N_; ++j) {
            if (state_[j] == St::Basic) continue;
            if (hi_[j] - lo_[j] <= kTol) continue; // fixed
            double dj = (*price)[j];
            double viol = 0.0;
            if (state_[j] == St::Lower && dj < -kDTol) viol = -dj;
            else if (state_[j] == St::Upper && dj > kDTol) viol = dj;
            if (viol > 0.0) {
                if (bland) { enter = j; break; }
                if (viol > best) { best = viol; enter = j; }
            }
        }
        if (enter < 0) {
            if (!phase1) return Status::Optimal;
            if (infeasibility() <= kTol) return Status::Optimal;
            // a stall with violations left can be an artifact of tableau
            // drift after pivots on tiny elements; rebuild once per pivot
            // position before concluding anything from it
            if (iters_ != last_factor_ && refactorize()) continue;
            return Status::Infeasible;
        }

        double delta = state_[enter] == St::Lower ? 1.0 : -1.0;
        double flip = is_inf(hi_[enter]) ? kInf : hi_[enter] - lo_[enter];

        // Two-pass ratio test: pass 1 finds the smallest step that pushes
        // some row one tolerance past its blocking bound; pass 2 keeps the
        // numerically largest pivot among rows that block within that limit.
        // Tiny pivot elements are then chosen only when they are the sole
        // blockers, which keeps 1/pivot amplification out of the tableau.
        double limit = kInf;
        for (int r = 0; r < m_; ++r) {
            double alpha = tab(r, enter) * delta;
            if (std::abs(alpha) <= kPivTol) continue;
            int i = basis_[r];
            double x = xb_[r], room;
            if (phase1 && x < lo_[i] - kTol) {
                if (alpha >= 0.0) continue; // moves further below
                room = lo_[i] - x;
            } else if (phase1 && x > hi_[i] + kTol) {
                if (alpha <= 0.0) continue;
                room = x - hi_[i];
            } else if (alpha > 0.0) {
                if (is_inf(lo_[i])) continue;
                room = x - lo_[i];
            } else {
                if (is_inf(hi_[i])) continue;
                room = hi_[i] - x;
            }
            if (room < 0.0) room = 0.0;
            double rel = (room + kTol) / std::abs(alpha);
            if (rel < limit) limit = rel;
        }

        int lrow = -1;
        double best_ratio = kInf, best_piv = 0.0;
        for (int r = 0; r < m_; ++r) {
            double alpha = tab(r, enter) * delta;
            if (std::abs(alpha) <= kPivTol) continue;
            int i = basis_[r];
            double x = xb_[r], ratio;
            if (phase1 && x < lo_[i] - kTol) {
                if (alpha >= 0.0) continue;
                ratio = (lo_[i] - x) / (-alpha);
            } else if (phase1 && x > hi_[i] + kTol) {
                if (alpha <= 0.0) continue;
                ratio = (x - hi_[i]) / alpha;
            } else if (alpha > 0.0) {
                if (is_inf(lo_[i])) continue;
                ratio = (x - lo_[i]) / alpha;
            } else {
                if (is_inf(hi_[i])) continue;
                ratio = (hi_[i] - x) / (-alpha);
            }
            if (ratio < 0.0) ratio = 0.0;
            bool better;
            if (bland) {
                // anti-cycling: strict minimum ratio, ties to the smallest
                // basis index
                better = lrow < 0 || ratio < best_ratio - 1e-12 ||
                         (ratio < best_ratio + 1e-12 && basis_[r] < basis_[lrow]);
            } else {
                if (ratio > limit) continue;
                better = lrow < 0 || std::abs(alpha) > std::abs(best_piv);
            }
            if (better) {
                lrow = r;
                best_ratio = ratio;
                best_piv = tab(r, enter);
            }
        }

        double step = std::min(best_ratio, flip);
        if (is_inf(step)) return Status::Unbounded;
        if (step <= kTol) ++degen_streak_; else degen_streak_ = 0;

        if (flip <= best_ratio) {
            // bound flip, no basis change
            for (int r = 0; r < m_; ++r) xb_[r] -= tab(r, enter) * delta * flip;
            state_[enter] = state_[enter] == St::Lower ? St::Upper : St::Lower;
            val_[enter] = state_[enter] == St::Lower ? lo_[enter] : hi_[enter];
            ++iters_;
            continue;
        }
        pivot(lrow, enter, delta * step);
    }
    return Status::IterLimit;
}

Simplex::Status Simplex::dual_loop(long max_iter) {
    for (long it = 0; it < max_iter; ++it) {
        bool bland = degen_streak_ > 200;
        int lrow = -1;
        double worst = kTol;
        bool shortage = false;
        for (int r = 0; r < m_; ++r) {
            int i = basis_[r];
            double below = lo_[i] - xb_[r];
            double above = is_inf(hi_[i]) ? -kInf : xb_[r] - hi_[i];
            double v = std::max(below, above);
            if (v > worst) {
                worst = v;
                lrow = r;
                shortage = below >= above;
            }
            if (bland && lrow >= 0) break;
        }
        if (lrow < 0) return Status::Optimal;

        // two-pass dual ratio test, mirroring the primal one: pass 1 bounds
        // the dual step by one tolerance past the tightest reduced cost,
        // pass 2 takes the numerically largest pivot within that bound
        double limit = kInf;
        for (int j = 0; j < N_; ++j) {
            if (state_[j] == St::Basic) continue;
            if (hi_[j] - lo_[j] <= kTol) continue;
            double alpha = tab(lrow, j);
            if (std::abs(alpha) <= kPivTol) continue;
            double sigma = state_[j] == St::Lower ? 1.0 : -1.0;
            double sa = sigma * alpha;
            if (shortage ? sa >= -kPivTol : sa <= kPivTol) continue;
            double rel = (std::abs(d_[j]) + kDTol) / std::abs(alpha);
            if (rel < limit) limit = rel;
        }
        int enter = -1;
        double best_ratio = kInf, best_alpha = 0.0;
        for (int j = 0; j < N_; ++j) {
            if (state_[j] == St::Basic) continue;
            if (hi_[j] - lo_[j] <= kTol) continue;
            double alpha = tab(lrow, j);
            if (std::abs(alpha) <= kPivTol) continue;
            double sigma = state_[j] == St::Lower ? 1.0 : -1.0;
            double sa = sigma * alpha;
            if (shortage ? sa >= -kPivTol : sa <= kPivTol) continue;
            double ratio = std::abs(d_[j]) / std::abs(alpha);
            bool better;
            if (bland) {
                // anti-cycling: lexicographic on (ratio, index)
                better = enter < 0 || ratio < best_ratio - 1e-12 ||
                         (ratio < best_ratio + 1e-12 && j < enter);
            } else {
                if (ratio > limit) continue;
                better = enter < 0 || std::abs(alpha) > std::abs(best_alpha);
            }
            if (better) {
                enter = j;
                best_ratio = ratio;
                best_alpha = alpha;
            }
        }
        if (enter < 0) {
            // verify on rebuilt rows before declaring the (primal) problem
            // infeasible; drift can hide admissible entering columns
            if (iters_ != last_factor_ && refactorize()) continue;
            return Status::Infeasible;
        }

        int leave = basis_[lrow];
        double target = shortage ? lo_[leave] : hi_[leave];
        double move = (xb_[lrow] - target) / tab(lrow, enter);
        if (std::abs(move) <= kTol) ++degen_streak_; else degen_streak_ = 0;
        pivot(lrow, enter, move);
    }
    return Status::IterLimit;
}

Simplex::Status Simplex::primal_from_scratch() {
    load_start_basis();
    long budget = 2000 + 10L * (m_ + N_);
    for (int round = 0; round < 4; ++round) {
        if (infeasibility() > kTol) {
            Status s = primal_loop(true, budget);
            if (s != Status::Optimal) return s;
        }
        Status s = primal_loop(false, budget);
        if (s != Status::Optimal) return s;
        // confirm the declared optimum on freshly rebuilt rows; if drift hid
        // a violation or an improving column, repair and re-optimize
        if (!refactorize()) break;
        if (infeasibility() > kTol) continue;
        long before = iters_;
        s = primal_loop(false, budget);
        if (s != Status::Optimal) return s;
        if (iters_ == before) break;
    }
    return Status::Optimal;
}

Simplex::Status Simplex::dual_reoptimize() {
    if (!has_basis_) return primal_from_scratch();
    snap_nonbasic();
    long budget = 1000 + 4L * (m_ + N_);
    Status s = dual_loop(budget);
    if (s == Status::IterLimit) return primal_from_scratch();
    return s;
}

std::vector<double> Simplex::solution() const {
    std::vector<double> out(n_, 0.0);
    for (int j = 0; j < n_; ++j)
        if (state_[j] != St::Basic) out[j] = val_[j];
    for (int r = 0; r < m_; ++r)
        if (basis_[r] < n_) out[basis_[r]] = xb_[r];
    return out;
}

double Simplex::objective() const {
    double obj = 0.0;
    for (int j = 0; j < n_; ++j) {
        double v = state_[j] == St::Basic ? 0.0 : val_[j];
        obj += cost_[j] * v;
    }
    for (int r = 0; r < m_; ++r)
        if (basis_[r] < n_) obj += cost_[basis_[r]] * xb_[r];
    return obj;
}

void Simplex::snap_nonbasic() {
    for (int j = 0; j < N_; ++j) {
        if (state_[j] == St::Basic) continue;
        double nv = state_[j] == St::Lower ? lo_[j] : hi_[j];
        if (nv != val_[j]) {
            for (int r = 0; r < m_; ++r) xb_[r] -= tab(r, j) * (nv - val_[j]);
            val_[j] = nv;
        }
    }
}

} // namespace hetmap
