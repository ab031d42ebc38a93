#pragma once

#include "pitik/index_function.hpp"
#include "pitik/penalty.hpp"

#include <vector>

namespace pitik {

struct AlphaSequence {
    std::vector<double> alphas;  // alpha_1 .. alpha_m
    int m = 0;
};

// alpha_j = tau ln(t)/sqrt(t) r^(2j-2), stopped at the first alpha_j >= 1.
AlphaSequence alpha_sequence(double t, double tau, double r);

struct BalanceResult {
    int j_bal = 1;  // 1-based
    Eigen::MatrixXd distances;
    std::vector<double> psi;        // psi(j) = 2 (4 C_bd)^(1/q) r^((2-2j)/q)
    std::vector<double> thresholds; // 4 (4 C_bd)^(1/q) r^((2-2i)/q)
};

double lepskii_psi(int j, double q, double C_bd, double r);

// Largest j such that ||u_i - u_j|| <= 4 (4 C_bd)^(1/q) r^((2-2i)/q) for all i < j.
BalanceResult balance(const std::vector<GridFunction>& reconstructions, double q, double C_bd, double r);

struct ErrorFunctions {
    double f_app;
    double f_noi;
};

ErrorFunctions error_functions(const IndexFunction& phi, double q, double C_bd, double err, double alpha);

// 1-based argmin of the Bregman distance to udag; ties go to the smallest j.
int oracle_best(const std::vector<GridFunction>& reconstructions, const GridFunction& udag, const Penalty& pen,
                const GridFunction& ustar);

}  // namespace pitik
