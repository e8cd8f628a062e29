#pragma once

// Independent numerical oracles for the tests: Richardson-extrapolated finite
// differences on plain double functions, and classical Riemannian curvature
// assembled from finite differences of metric values.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "spraylab/jets.hpp"

namespace oracle {

using Fn = std::function<double(std::span<const double>)>;
using VecFn = std::function<std::vector<double>(std::span<const double>)>;

// d^a f(p) by central differences in every slot, extrapolated over h, h/2, h/4.
double partial(const Fn& f, std::span<const double> p, const spraylab::MultiIndex& a, double h = 1e-2);

// Metric g_ij(x) given as a row-major n*n matrix of values.
using MetricFn = std::function<std::vector<double>(std::span<const double>)>;

// Gamma^i_jk, row-major (i, j, k).
std::vector<double> christoffel(const MetricFn& g, std::span<const double> x, int n);
// R^i_jkl = d_k Gamma^i_lj - d_l Gamma^i_kj + Gamma^i_km Gamma^m_lj - Gamma^i_lm Gamma^m_kj.
std::vector<double> riemann(const MetricFn& g, std::span<const double> x, int n);
// R^i_k = R^i_jkl y^j y^l.
std::vector<double> riemann_two(const MetricFn& g, std::span<const double> x, std::span<const double> y, int n);

// Spray Riemann curvature R^i_k from finite differences of G^i(x, y) values;
// z = (x, y) packed.
std::vector<double> spray_riemann(const VecFn& G, std::span<const double> z, int n, double h = 1e-2);

// Random expression source in x1..xn, y1..yn, built so that it stays defined
// around the sampling box [-0.8, 0.8]^n x (unit sphere).
std::string random_expression(std::mt19937_64& rng, int n, int depth);

}  // namespace oracle
