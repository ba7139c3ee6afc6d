#pragma once

#include <cstdint>
#include <vector>

#include "hetmap/milp.hpp"

namespace hetmap {

// Bounded-variable simplex over a MilpModel's linear relaxation.
// Dense full-tableau implementation with a composite (artificial-free)
// phase 1, Dantzig pricing, Bland fallback against cycling, and a dual
// method for re-optimization after bound changes.
class Simplex {
public:
    enum class Status { Optimal, Infeasible, Unbounded, IterLimit };

    explicit Simplex(const MilpModel& model);

    // Structural variable bound overrides (branching); basis is kept.
    void set_var_bounds(int var, double lo, double hi);
    void reset_var_bounds();
    double var_lo(int var) const { return lo_[var]; }
    double var_hi(int var) const { return hi_[var]; }

    Status primal_from_scratch(); // fresh start basis, phase 1 + phase 2
    Status dual_reoptimize();     // from the current (dual-feasible) basis

    double objective() const;
    // Values for all model variables.
    std::vector<double> solution() const;
    long iterations() const { return iters_; }

private:
    static constexpr double kTol = 1e-9;   // feasibility
    static constexpr double kDTol = 1e-9;  // dual feasibility
    static constexpr double kPivTol = 1e-10;

    int n_ = 0; // structural columns
    int m_ = 0; // rows
    int N_ = 0; // n_ + m_
    std::vector<double> a_;     // m_ x n_ structural matrix (row major)
    std::vector<double> b_;     // rhs
    std::vector<double> cost_;  // phase-2 costs, size N_
    std::vector<double> lo_, hi_;
    std::vector<double> model_lo_, model_hi_;

    std::vector<double> tab_;   // m_ x N_ current tableau
    std::vector<double> xb_;    // basic values per row
    std::vector<double> d_;     // phase-2 reduced costs
    std::vector<int> basis_;    // row -> column
    enum class St : uint8_t { Basic, Lower, Upper };
    std::vector<St> state_;
    std::vector<double> val_;   // nonbasic values (their active bound)
    bool has_basis_ = false;
    long iters_ = 0;
    long last_factor_ = 0; // iters_ at the most recent (re)factorization
    int degen_streak_ = 0;

    double tab(int r, int j) const { return tab_[static_cast<size_t>(r) * N_ + j]; }
    double& tab(int r, int j) { return tab_[static_cast<size_t>(r) * N_ + j]; }

    void load_start_basis();
    void compute_xb();
    bool refactorize();
    void pivot(int row, int enter, double new_val);
    double infeasibility() const;
    void phase1_costs(std::vector<double>& d1) const;
    Status primal_loop(bool phase1, long max_iter);
    Status dual_loop(long max_iter);
    void snap_nonbasic();
};

} // namespace hetmap
