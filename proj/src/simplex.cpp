#include "bp/simplex.hpp"

#include <cmath>
#include <type_traits>

#include <boost/multiprecision/cpp_int.hpp>

namespace bp {

using Rational = boost::multiprecision::cpp_rational;

namespace {

// Classic two-phase tableau. Layout: columns [structural | slack/artificial],
// one extra rhs column; `basis[i]` names the basic column of row i.
template <class T>
class Tableau {
public:
    Tableau(const DenseLp<T>& lp, const T& eps)
        : lp_(lp), eps_(eps), pivot_eps_(eps) {
        if constexpr (std::is_same_v<T, double>) pivot_eps_ = 1e-9;
        const int m = static_cast<int>(lp.rows.size());
        n_ = lp.num_vars;

        // Count auxiliary columns: LE rows get a slack; GE rows a surplus and
        // an artificial; EQ rows an artificial. Rows are first normalized to
        // nonnegative rhs.
        std::vector<RowSense> sense(m);
        std::vector<T> rhs(m);
        std::vector<std::vector<T>> dense(m, std::vector<T>(n_, T(0)));
        for (int i = 0; i < m; ++i) {
            const auto& row = lp.rows[i];
            sense[i] = row.sense;
            rhs[i] = row.rhs;
            for (const auto& [j, a] : row.coeffs) dense[i][j] += a;
            if (rhs[i] < T(0)) {
                rhs[i] = -rhs[i];
                for (auto& a : dense[i]) a = -a;
                if (sense[i] == RowSense::LE) sense[i] = RowSense::GE;
                else if (sense[i] == RowSense::GE) sense[i] = RowSense::LE;
            }
        }

        int aux = 0;
        for (int i = 0; i < m; ++i) aux += (sense[i] == RowSense::GE) ? 2 : 1;
        cols_ = n_ + aux;
        a_.assign(m, std::vector<T>(cols_ + 1, T(0)));
        basis_.assign(m, -1);
        artificial_.assign(cols_, false);

        int next = n_;
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n_; ++j) a_[i][j] = dense[i][j];
            a_[i][cols_] = rhs[i];
            switch (sense[i]) {
            case RowSense::LE:
                a_[i][next] = T(1);
                basis_[i] = next++;
                break;
            case RowSense::GE:
                a_[i][next] = T(-1); // surplus
                ++next;
                a_[i][next] = T(1); // artificial
                artificial_[next] = true;
                basis_[i] = next++;
                break;
            case RowSense::EQ:
                a_[i][next] = T(1);
                artificial_[next] = true;
                basis_[i] = next++;
                break;
            }
        }
    }

    LpSolution<T> solve() {
        const int m = static_cast<int>(a_.size());

        bool have_artificial = false;
        for (int i = 0; i < m; ++i)
            if (artificial_[basis_[i]]) have_artificial = true;

        if (have_artificial) {
            // Phase 1: maximize -sum(artificials).
            std::vector<T> obj(cols_, T(0));
            for (int j = 0; j < cols_; ++j)
                if (artificial_[j]) obj[j] = T(-1);
            build_objective_row(obj);
            run();
            if (z_value() < -eps_ - eps_) {
                LpSolution<T> r;
                r.status = LpStatus::Infeasible;
                return r;
            }
            // Pivot surviving artificials out of the basis (they sit at zero).
            for (int i = 0; i < m; ++i) {
                if (!artificial_[basis_[i]]) continue;
                int enter = -1;
                for (int j = 0; j < n_ && enter < 0; ++j)
                    if (!artificial_[j] && abs_gt(a_[i][j])) enter = j;
                if (enter >= 0) pivot(i, enter);
                // else: redundant row, harmless to leave (its rhs is zero).
            }
            // Ban artificial columns from re-entering.
            for (int j = 0; j < cols_; ++j)
                if (artificial_[j])
                    for (int i = 0; i < m; ++i) a_[i][j] = T(0);
        }

        // Phase 2.
        std::vector<T> obj(cols_, T(0));
        for (int j = 0; j < n_; ++j) obj[j] = lp_.objective[j];
        build_objective_row(obj);
        if (!run()) {
            LpSolution<T> r;
            r.status = LpStatus::Unbounded;
            return r;
        }

        LpSolution<T> r;
        r.status = LpStatus::Optimal;
        r.x.assign(n_, T(0));
        for (int i = 0; i < m; ++i)
            if (basis_[i] < n_) r.x[basis_[i]] = a_[i][cols_];
        r.objective = z_value();
        return r;
    }

private:
    bool abs_gt(const T& v) const { return v > eps_ || v < -eps_; }

    void build_objective_row(const std::vector<T>& obj) {
        obj_ = obj;
        // Reduced costs z_j - c_j for the current basis.
        z_.assign(cols_ + 1, T(0));
        for (int j = 0; j <= cols_; ++j) {
            T zj(0);
            for (std::size_t i = 0; i < a_.size(); ++i)
                zj += obj_[basis_[i]] * a_[i][j];
            z_[j] = zj - (j < cols_ ? obj_[j] : T(0));
        }
    }

    T z_value() const { return z_[cols_]; }

    // Returns false when the LP is unbounded in the current phase.
    // Pricing starts with Dantzig's rule and falls back to Bland's rule
    // permanently once the objective stalls, which prevents cycling while
    // keeping the iteration count practical. Ties break on the smallest
    // index either way, so the walk is deterministic.
    bool run() {
        const int m = static_cast<int>(a_.size());
        bool bland = false;
        int stalled = 0;
        T last_obj = z_value();
        for (;;) {
            int enter = -1;
            if (bland) {
                for (int j = 0; j < cols_; ++j) {
                    if (z_[j] < -eps_) {
                        enter = j;
                        break;
                    }
                }
            } else {
                T best = -eps_;
                for (int j = 0; j < cols_; ++j) {
                    if (z_[j] < best) {
                        best = z_[j];
                        enter = j;
                    }
                }
            }
            if (enter < 0) return true;

            int leave = -1;
            T best_ratio(0);
            for (int i = 0; i < m; ++i) {
                if (a_[i][enter] > pivot_eps_) {
                    T ratio = a_[i][cols_] / a_[i][enter];
                    if (leave < 0 || ratio < best_ratio ||
                        (ratio == best_ratio && basis_[i] < basis_[leave])) {
                        leave = i;
                        best_ratio = ratio;
                    }
                }
            }
            if (leave < 0) return false;
            if constexpr (std::is_same_v<T, double>) {
                // Among near-tied ratios take the largest pivot element; tiny
                // pivots blow up the tableau numerically.
                double band = best_ratio + 1e-9 * (1.0 + std::abs(best_ratio));
                for (int i = 0; i < m; ++i) {
                    if (a_[i][enter] <= pivot_eps_) continue;
                    double ratio = a_[i][cols_] / a_[i][enter];
                    if (ratio <= band && a_[i][enter] > a_[leave][enter])
                        leave = i;
                }
            }
            pivot(leave, enter);

            if (!bland) {
                T obj = z_value();
                if (obj > last_obj) {
                    stalled = 0;
                    last_obj = obj;
                } else if (++stalled > 64 + cols_ / 4) {
                    bland = true;
                }
            }
        }
    }

    void pivot(int row, int col) {
        const int m = static_cast<int>(a_.size());
        T inv = T(1) / a_[row][col];
        for (int j = 0; j <= cols_; ++j) a_[row][j] *= inv;
        a_[row][col] = T(1);
        for (int i = 0; i < m; ++i) {
            if (i == row) continue;
            T factor = a_[i][col];
            if (factor == T(0)) continue;
            for (int j = 0; j <= cols_; ++j) a_[i][j] -= factor * a_[row][j];
            a_[i][col] = T(0);
        }
        if (!z_.empty()) {
            T factor = z_[col];
            if (factor != T(0)) {
                for (int j = 0; j <= cols_; ++j) z_[j] -= factor * a_[row][j];
                z_[col] = T(0);
            }
        }
        basis_[row] = col;
    }

    const DenseLp<T>& lp_;
    T eps_;
    T pivot_eps_;
    int n_ = 0;
    int cols_ = 0;
    std::vector<std::vector<T>> a_;
    std::vector<T> z_;
    std::vector<T> obj_;
    std::vector<int> basis_;
    std::vector<bool> artificial_;
};

} // namespace

template <class T>
LpSolution<T> solve_dense_lp(const DenseLp<T>& lp, const T& eps) {
    Tableau<T> tab(lp, eps);
    return tab.solve();
}

template LpSolution<double> solve_dense_lp(const DenseLp<double>&, const double&);
template LpSolution<Rational> solve_dense_lp(const DenseLp<Rational>&,
                                             const Rational&);

} // namespace bp
