#include "oracles.hpp"

#include <cmath>

namespace oracle {

namespace {

double binomial(int k, int j) {
    double r = 1.0;
    for (int i = 1; i <= j; ++i) r = r * (k - j + i) / i;
    return r;
}

// Product of central k-th difference stencils; O(h^2) accurate.
double central(const Fn& f, std::vector<double> p, const spraylab::MultiIndex& a, int slot, double h) {
    while (slot < a.dim() && a[slot] == 0) ++slot;
    if (slot >= a.dim()) return f(p);
    const int k = a[slot];
    const double base = p[static_cast<std::size_t>(slot)];
    double acc = 0.0;
    for (int j = 0; j <= k; ++j) {
        p[static_cast<std::size_t>(slot)] = base + (0.5 * k - j) * h;
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        acc += sign * binomial(k, j) * central(f, p, a, slot + 1, h);
    }
    return acc / std::pow(h, k);
}

}  // namespace

double partial(const Fn& f, std::span<const double> p, const spraylab::MultiIndex& a, double h) {
    const std::vector<double> q(p.begin(), p.end());
    const double d1 = central(f, q, a, 0, h);
    const double d2 = central(f, q, a, 0, h / 2);
    const double d3 = central(f, q, a, 0, h / 4);
    const double r1 = (4 * d2 - d1) / 3;
    const double r2 = (4 * d3 - d2) / 3;
    return (16 * r2 - r1) / 15;
}

std::vector<double> christoffel(const MetricFn& g, std::span<const double> x, int n) {
    const auto N = static_cast<std::size_t>(n);
    const auto g0 = g(x);
    // inverse by Gauss-Jordan
    std::vector<double> a = g0, inv(N * N, 0.0);
    for (std::size_t i = 0; i < N; ++i) inv[i * N + i] = 1.0;
    for (std::size_t c = 0; c < N; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < N; ++r)
            if (std::abs(a[r * N + c]) > std::abs(a[piv * N + c])) piv = r;
        for (std::size_t k = 0; k < N; ++k) {
            std::swap(a[c * N + k], a[piv * N + k]);
            std::swap(inv[c * N + k], inv[piv * N + k]);
        }
        const double d = a[c * N + c];
        for (std::size_t k = 0; k < N; ++k) {
            a[c * N + k] /= d;
            inv[c * N + k] /= d;
        }
        for (std::size_t r = 0; r < N; ++r) {
            if (r == c) continue;
            const double m = a[r * N + c];
            for (std::size_t k = 0; k < N; ++k) {
                a[r * N + k] -= m * a[c * N + k];
                inv[r * N + k] -= m * inv[c * N + k];
            }
        }
    }
    // dg[(i*n + j)*n + k] = d_k g_ij
    std::vector<double> dg(N * N * N);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j)
            for (std::size_t k = 0; k < N; ++k) {
                Fn gij = [&, i, j](std::span<const double> z) { return g(z)[i * N + j]; };
                dg[(i * N + j) * N + k] = partial(gij, x, spraylab::MultiIndex::unit(n, static_cast<int>(k)));
            }
    std::vector<double> out(N * N * N, 0.0);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j)
            for (std::size_t k = 0; k < N; ++k) {
                double s = 0.0;
                for (std::size_t l = 0; l < N; ++l) {
                    s += inv[i * N + l] * (dg[(l * N + j) * N + k] + dg[(l * N + k) * N + j] - dg[(j * N + k) * N + l]);
                }
                out[(i * N + j) * N + k] = 0.5 * s;
            }
    return out;
}

std::vector<double> riemann(const MetricFn& g, std::span<const double> x, int n) {
    const auto N = static_cast<std::size_t>(n);
    const auto G = christoffel(g, x, n);
    auto at = [&](const std::vector<double>& t, std::size_t i, std::size_t j, std::size_t k) { return t[(i * N + j) * N + k]; };
    // dG[((i*n + j)*n + k)*n + m] = d_m Gamma^i_jk, central difference of the oracle itself
    std::vector<double> dG(N * N * N * N);
    const double h = 2e-3;
    for (std::size_t m = 0; m < N; ++m) {
        std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
        std::vector<double> xp2 = xp, xm2 = xm;
        xp[m] += h;
        xm[m] -= h;
        xp2[m] += 2 * h;
        xm2[m] -= 2 * h;
        const auto Gp = christoffel(g, xp, n), Gm = christoffel(g, xm, n);
        const auto Gp2 = christoffel(g, xp2, n), Gm2 = christoffel(g, xm2, n);
        for (std::size_t q = 0; q < N * N * N; ++q) {
            dG[q * N + m] = (8 * (Gp[q] - Gm[q]) - (Gp2[q] - Gm2[q])) / (12 * h);
        }
    }
    std::vector<double> R(N * N * N * N);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j)
            for (std::size_t k = 0; k < N; ++k)
                for (std::size_t l = 0; l < N; ++l) {
                    double v = dG[((i * N + l) * N + j) * N + k] - dG[((i * N + k) * N + j) * N + l];
                    for (std::size_t m = 0; m < N; ++m) v += at(G, i, k, m) * at(G, m, l, j) - at(G, i, l, m) * at(G, m, k, j);
                    R[((i * N + j) * N + k) * N + l] = v;
                }
    return R;
}

std::vector<double> riemann_two(const MetricFn& g, std::span<const double> x, std::span<const double> y, int n) {
    const auto N = static_cast<std::size_t>(n);
    const auto R = riemann(g, x, n);
    std::vector<double> out(N * N, 0.0);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t k = 0; k < N; ++k)
            for (std::size_t j = 0; j < N; ++j)
                for (std::size_t l = 0; l < N; ++l) out[i * N + k] += R[((i * N + j) * N + k) * N + l] * y[j] * y[l];
    return out;
}

std::vector<double> spray_riemann(const VecFn& G, std::span<const double> z, int n, double h) {
    const auto N = static_cast<std::size_t>(n);
    const int d = 2 * n;
    auto comp = [&](std::size_t i) { return Fn([&, i](std::span<const double> w) { return G(w)[i]; }); };
    auto D = [&](std::size_t i, std::vector<int> slots) {
        spraylab::MultiIndex a(d);
        for (int s : slots) a.bump(s);
        return partial(comp(i), z, a, h);
    };
    const auto G0 = G(z);
    std::vector<double> out(N * N);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t k = 0; k < N; ++k) {
            const int yk = n + static_cast<int>(k);
            double v = 2.0 * D(i, {static_cast<int>(k)});
            for (std::size_t j = 0; j < N; ++j) {
                const int yj = n + static_cast<int>(j);
                v -= z[N + j] * D(i, {static_cast<int>(j), yk});
                v += 2.0 * G0[j] * D(i, {yj, yk});
                v -= D(i, {yj}) * D(j, {yk});
            }
            out[i * N + k] = v;
        }
    return out;
}

std::string random_expression(std::mt19937_64& rng, int n, int depth) {
    auto pick = [&](int k) { return static_cast<int>(rng() % static_cast<std::uint64_t>(k)); };
    auto var = [&] {
        return std::string(pick(2) ? "x" : "y") + std::to_string(1 + pick(n));
    };
    auto num = [&] {
        static const char* values[] = {"0.5", "2", "1.25", "3", "0.1", "7"};
        return std::string(values[pick(6)]);
    };
    if (depth <= 0) return pick(3) ? var() : num();
    const std::string a = random_expression(rng, n, depth - 1);
    switch (pick(9)) {
        case 0: return "(" + a + " + " + random_expression(rng, n, depth - 1) + ")";
        case 1: return "(" + a + " - " + random_expression(rng, n, depth - 1) + ")";
        case 2: return a + "*" + random_expression(rng, n, depth - 1);
        case 3: return a + "/(2 + " + var() + "^2)";
        case 4: return "(" + a + ")^" + std::to_string(2 + pick(2));
        case 5: return "sin(" + a + ")";
        case 6: return "cos(" + a + ")";
        case 7: return "exp(0.3*" + a + ")";
        default: return "sqrt(1.5 + " + var() + "^2)*" + a;
    }
}

}  // namespace oracle
