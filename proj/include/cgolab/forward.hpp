#pragma once

// Conductivity equation on the unit disk: Dirichlet-to-Neumann matrices in the
// trigonometric basis and their H^{1/2} -> H^{-1/2} distances.

#include "cgolab/beltrami.hpp"
#include "cgolab/spaces.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cgolab {

struct Conductivity {
    Field gamma;
    double epsilon_bound = 0.0;   ///< epsilon <= gamma <= 1/epsilon
    double boundary_radius = 1.0; ///< gamma = 1 for |z| >= boundary_radius
    double alpha = 2.0;
    SeminormReport seminorm;      ///< of gamma - 1 against |log r|^-alpha
    /// Exact profile when known; otherwise off-grid values are interpolated.
    std::function<double(cplx)> profile;

    double at(cplx z) const {
        if (profile) return profile(z);
        return bilinear(z);
    }

private:
    double bilinear(cplx z) const {
        const auto& g = gamma.grid();
        const double h = g.spacing();
        const double x = (z.real() + g.half_width) / h, y = (z.imag() + g.half_width) / h;
        const int j = static_cast<int>(std::floor(x)), m = static_cast<int>(std::floor(y));
        const double tx = x - j, ty = y - m;
        auto v = [&](int jj, int mm) { return gamma((jj % g.n + g.n) % g.n, (mm % g.n + g.n) % g.n).real(); };
        return (1 - tx) * (1 - ty) * v(j, m) + tx * (1 - ty) * v(j + 1, m) + (1 - tx) * ty * v(j, m + 1) +
               tx * ty * v(j + 1, m + 1);
    }
};

/// Checks positivity, reality and gamma = 1 outside r1, and measures the bounds.
inline Conductivity make_conductivity(Field gamma, double r1, double alpha = 2.0,
                                      std::function<double(cplx)> profile = {}, std::uint64_t seed = 0) {
    if (!(r1 > 0.0 && r1 < 1.0)) throw std::invalid_argument("make_conductivity: need 0 < r1 < 1");
    const auto& g = gamma.grid();
    double lo = INFINITY, hi = 0.0;
    for (int m = 0; m < g.n; ++m)
        for (int j = 0; j < g.n; ++j) {
            const cplx v = gamma(j, m);
            if (!(v.real() > 0.0) || v.imag() != 0.0)
                throw std::invalid_argument("make_conductivity: gamma must be real and positive");
            if (std::abs(g.point(j, m)) >= r1 && v.real() != 1.0)
                throw std::invalid_argument("make_conductivity: gamma must equal 1 outside r1");
            lo = std::min(lo, v.real());
            hi = std::max(hi, v.real());
        }
    Conductivity c;
    c.epsilon_bound = std::min(lo, 1.0 / hi);
    c.boundary_radius = r1;
    c.alpha = alpha;
    c.seminorm = c_modulus_seminorm(gamma.map([](cplx v) { return v - 1.0; }), ModulusSpec::log_power(alpha),
                                    default_seminorm_method(g), seed);
    c.gamma = std::move(gamma);
    c.profile = std::move(profile);
    return c;
}

// --- DtN assembly -----------------------------------------------------------------------

struct PolarMesh {
    int radial = 256;  ///< intervals on [0, 1]
    int angular = 512; ///< points on the circle
};

/// Lambda in the basis e^{in theta}, |n| <= modes: entries(m + modes, n + modes) is the
/// coefficient of e^{im theta} in the flux produced by Dirichlet data e^{in theta}.
struct DtnMatrix {
    int modes = 0;
    Eigen::MatrixXcd entries;
    PolarMesh mesh;

    cplx operator()(int m, int n) const { return entries(m + modes, n + modes); }
    int size() const { return 2 * modes + 1; }
};

/// Polar finite differences with harmonic-mean face coefficients.  Nodes sit at
/// r_i = i dr; the centre node closes the system by flux balance over its
/// half-cell.  The flux at r = 1 is the one-sided three-point difference, which
/// dominates the error (about 1e-3 relative for |n| = 16 at 256 radial intervals).
inline DtnMatrix dtn_assemble(const Conductivity& c, int modes, const PolarMesh& mesh = {}) {
    if (modes < 0) throw std::invalid_argument("dtn_assemble: modes must be nonnegative");
    if (mesh.angular < 8 * modes || mesh.angular < 8)
        throw std::invalid_argument("dtn_assemble: need at least 8 angular points per mode");
    if (mesh.radial < 4) throw std::invalid_argument("dtn_assemble: need at least 4 radial intervals");
    const int nr = mesh.radial, nt = mesh.angular;
    const double dr = 1.0 / nr, dt = 2.0 * PI / nt;

    std::vector<double> cs(nt), sn(nt);
    for (int j = 0; j < nt; ++j) {
        cs[j] = std::cos(j * dt);
        sn[j] = std::sin(j * dt);
    }
    // Node conductivities, rows i = 0..nr (row 0 is the centre, repeated).
    std::vector<double> gam(static_cast<std::size_t>(nr + 1) * nt);
    const double g0 = c.at(0.0);
    for (int i = 0; i <= nr; ++i)
        for (int j = 0; j < nt; ++j)
            gam[static_cast<std::size_t>(i) * nt + j] = i == 0 ? g0 : c.at(cplx(i * dr * cs[j], i * dr * sn[j]));
    auto G = [&](int i, int j) { return gam[static_cast<std::size_t>(i) * nt + ((j % nt + nt) % nt)]; };
    auto hmean = [](double a, double b) { return 2.0 * a * b / (a + b); };

    const int unknowns = 1 + (nr - 1) * nt;
    auto id = [&](int i, int j) { return i == 0 ? 0 : 1 + (i - 1) * nt + ((j % nt + nt) % nt); };
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(unknowns) * 5);
    std::vector<double> boundary_coupling(nt, 0.0);
    double centre = 0.0;
    for (int i = 1; i < nr; ++i) {
        const double r = i * dr;
        for (int j = 0; j < nt; ++j) {
            const int row = id(i, j);
            double diag = 0.0;
            // radial faces
            const double out = (r + 0.5 * dr) * hmean(G(i, j), G(i + 1, j)) * dt / dr;
            const double in = (r - 0.5 * dr) * hmean(G(i, j), G(i - 1, j)) * dt / dr;
            diag += out + in;
            if (i + 1 < nr) trip.emplace_back(row, id(i + 1, j), -out);
            else boundary_coupling[j] = out;
            trip.emplace_back(row, id(i - 1, j), -in);
            if (i == 1) {
                centre += in;
                trip.emplace_back(0, row, -in);
            }
            // angular faces
            const double up = dr / (r * dt) * hmean(G(i, j), G(i, j + 1));
            const double dn = dr / (r * dt) * hmean(G(i, j), G(i, j - 1));
            diag += up + dn;
            trip.emplace_back(row, id(i, j + 1), -up);
            trip.emplace_back(row, id(i, j - 1), -dn);
            trip.emplace_back(row, row, diag);
        }
    }
    trip.emplace_back(0, 0, centre);
    Eigen::SparseMatrix<double> A(unknowns, unknowns);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
    if (solver.info() != Eigen::Success) throw std::runtime_error("dtn_assemble: factorization failed");

    // Real and imaginary parts of the data e^{in theta}, n = 0..modes.
    const int cols = 2 * (modes + 1);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(unknowns, cols);
    for (int n = 0; n <= modes; ++n)
        for (int j = 0; j < nt; ++j) {
            rhs(id(nr - 1, j), 2 * n) = boundary_coupling[j] * std::cos(n * j * dt);
            rhs(id(nr - 1, j), 2 * n + 1) = boundary_coupling[j] * std::sin(n * j * dt);
        }
    const Eigen::MatrixXd sol = solver.solve(rhs);
    if (solver.info() != Eigen::Success) throw std::runtime_error("dtn_assemble: solve failed");

    DtnMatrix out;
    out.modes = modes;
    out.mesh = mesh;
    out.entries = Eigen::MatrixXcd::Zero(2 * modes + 1, 2 * modes + 1);
    std::vector<cplx> flux(nt);
    for (int n = 0; n <= modes; ++n) {
        for (int j = 0; j < nt; ++j) {
            const cplx ub = std::polar(1.0, n * j * dt);
            auto u = [&](int i) { return cplx(sol(id(i, j), 2 * n), sol(id(i, j), 2 * n + 1)); };
            const cplx u2 = nr == 2 ? cplx(sol(0, 2 * n), sol(0, 2 * n + 1)) : u(nr - 2);
            flux[j] = G(nr, j) * (3.0 * ub - 4.0 * u(nr - 1) + u2) / (2.0 * dr);
        }
        for (int m = -modes; m <= modes; ++m) {
            cplx s = 0.0;
            for (int j = 0; j < nt; ++j) s += flux[j] * std::polar(1.0, -m * j * dt);
            s /= static_cast<double>(nt);
            out.entries(m + modes, n + modes) = s;
            // Real coefficients: the data e^{-in theta} gives the conjugate flux.
            if (n > 0) out.entries(-m + modes, -n + modes) = std::conj(s);
        }
    }
    return out;
}

/// Largest singular value of D (A - B) D with D = diag((1 + n^2)^{-1/4}).
inline double dtn_opnorm_diff(const DtnMatrix& A, const DtnMatrix& B) {
    if (A.modes != B.modes) throw std::invalid_argument("dtn_opnorm_diff: mode counts differ");
    const int n = A.size();
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) {
        const double m = i - A.modes;
        w[i] = std::pow(1.0 + m * m, -0.25);
    }
    const Eigen::MatrixXcd M = w.asDiagonal() * (A.entries - B.entries) * w.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M.adjoint() * M, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

/// Largest entry of |A - A^*| relative to the largest entry of |A|.
inline double dtn_asymmetry(const DtnMatrix& A) {
    const double scale = A.entries.cwiseAbs().maxCoeff();
    return scale > 0.0 ? (A.entries - A.entries.adjoint()).cwiseAbs().maxCoeff() / scale : 0.0;
}

// Header line "N_b mesh_r mesh_theta", then row-major little-endian complex doubles.
inline void write_dtn(std::ostream& os, const DtnMatrix& A) {
    os << A.modes << ' ' << A.mesh.radial << ' ' << A.mesh.angular << '\n';
    for (int i = 0; i < A.size(); ++i)
        for (int j = 0; j < A.size(); ++j) {
            detail::put_le_double(os, A.entries(i, j).real());
            detail::put_le_double(os, A.entries(i, j).imag());
        }
    if (!os) throw std::runtime_error("write_dtn: stream error");
}

inline DtnMatrix read_dtn(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw std::runtime_error("read_dtn: missing header");
    std::istringstream hs(header);
    DtnMatrix A;
    if (!(hs >> A.modes >> A.mesh.radial >> A.mesh.angular) || A.modes < 0)
        throw std::runtime_error("read_dtn: malformed header");
    A.entries.resize(A.size(), A.size());
    for (int i = 0; i < A.size(); ++i)
        for (int j = 0; j < A.size(); ++j) {
            const double re = detail::get_le_double(is), im = detail::get_le_double(is);
            A.entries(i, j) = cplx(re, im);
        }
    return A;
}

inline void save_dtn(const std::string& path, const DtnMatrix& A) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_dtn: cannot open " + path);
    write_dtn(os, A);
}

inline DtnMatrix load_dtn(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_dtn: cannot open " + path);
    return read_dtn(is);
}

// --- CGO solutions of the conductivity equation -------------------------------------------

/// u = Re f_plus + i Im f_minus.
inline Field cgo_to_u(const Field& f_plus, const Field& f_minus) {
    if (!(f_plus.grid() == f_minus.grid())) throw std::invalid_argument("cgo_to_u: grids differ");
    Field u(f_plus.grid());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = cplx(f_plus[i].real(), f_minus[i].imag());
    return u;
}

/// Gradient (d/dx, d/dy) of u = Re f_plus + i Im f_minus from the phase derivatives,
/// valid on the solver's disk points and zero elsewhere.
inline std::pair<Field, Field> cgo_u_gradient(const CgoPhase& plus, const CgoPhase& minus) {
    if (plus.disk_idx != minus.disk_idx) throw std::invalid_argument("cgo_u_gradient: phases on different grids");
    const auto [dp, dbp] = cgo_f_derivatives(plus);
    const auto [dm, dbm] = cgo_f_derivatives(minus);
    const auto& g = plus.phi.grid();
    Field ux(g), uy(g);
    for (std::size_t a : plus.disk_idx) {
        const cplx xp = dp[a] + dbp[a], yp = I * (dp[a] - dbp[a]);
        const cplx xm = dm[a] + dbm[a], ym = I * (dm[a] - dbm[a]);
        ux[a] = cplx(xp.real(), xm.imag());
        uy[a] = cplx(yp.real(), ym.imag());
    }
    return {std::move(ux), std::move(uy)};
}

/// Weak residual of div(gamma grad u) = 0: the largest of
///   |sum gamma grad u . grad v| / sum gamma |grad u| |grad v|
/// over smooth bumps v of radius 0.8 centred on a 3x3 lattice of spacing 0.3.
/// The sum is a plain grid quadrature, so it reaches solver precision only when
/// the grid resolves the bumps (N = 512 on [-4, 4)^2).
inline double weak_conductivity_residual(const Field& gamma, const Field& ux, const Field& uy) {
    const auto& g = gamma.grid();
    constexpr double bump = 0.8;
    double worst = 0.0;
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b) {
            const cplx centre(0.3 * a, 0.3 * b);
            // closed-form gradient; a spectral one adds its own error
            const Field grad_v = Field::sample(g, [&](cplx z) {
                const double r = std::abs(z - centre);
                if (r == 0.0 || r >= bump) return cplx(0.0);
                return smooth_step_down_deriv(r / bump) / bump * (z - centre) / r;
            });
            cplx num = 0.0;
            double den = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double vx = grad_v[i].real(), vy = grad_v[i].imag();
                if (vx == 0.0 && vy == 0.0) continue;
                const double gm = gamma[i].real();
                num += gm * (ux[i] * vx + uy[i] * vy);
                den += gm * std::sqrt(std::norm(ux[i]) + std::norm(uy[i])) * std::hypot(vx, vy);
            }
            if (den > 0.0) worst = std::max(worst, std::abs(num) / den);
        }
    return worst;
}

} // namespace cgolab
