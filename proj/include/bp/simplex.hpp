#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "bp/errors.hpp"

namespace bp {

enum class RowSense { LE, GE, EQ };

/// Dense LP in the form  max c.x  s.t.  rows, x >= 0.
template <class T>
struct DenseLp {
    int num_vars = 0;
    std::vector<T> objective;
    struct Row {
        std::vector<std::pair<int, T>> coeffs;
        RowSense sense = RowSense::LE;
        T rhs{};
    };
    std::vector<Row> rows;

    int add_var(T obj_coeff) {
        objective.push_back(obj_coeff);
        return num_vars++;
    }
    void add_row(std::vector<std::pair<int, T>> coeffs, RowSense sense, T rhs) {
        rows.push_back(Row{std::move(coeffs), sense, std::move(rhs)});
    }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

template <class T>
struct LpSolution {
    LpStatus status = LpStatus::Optimal;
    T objective{};
    std::vector<T> x;
};

/// Two-phase dense tableau simplex with Bland's rule. Bland's rule never
/// cycles, and the fixed index order makes the returned vertex deterministic
/// for a fixed input. With T = rational all comparisons are exact and `eps`
/// must be zero.
template <class T>
LpSolution<T> solve_dense_lp(const DenseLp<T>& lp, const T& eps);

} // namespace bp
