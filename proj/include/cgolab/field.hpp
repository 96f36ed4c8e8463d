#pragma once

// Complex fields on a periodic square grid, their discrete Fourier
// coefficients, and the periodic Fourier multipliers d-bar, d, T and P.
//
// Convention: the continuous transform uses the kernel exp(-2 pi i x.xi).
// On the grid, xi = n / (2L) with n_i in [-N/2, N/2).  Spectral coefficients
// are the unitary DFT (FFT / N) of the samples, phased relative to the lattice
// origin (-L, -L).  Writing zeta = xi_1 + i xi_2:
//   d-bar  ->  pi i zeta        d  ->  pi i conj(zeta)
//   T      ->  conj(zeta)/zeta  P  ->  1 / (pi i zeta)     (T, P vanish at 0)

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cgolab {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};
inline constexpr double PI = std::numbers::pi;

struct GridSpec {
    int n = 256;
    double half_width = 4.0;

    GridSpec() = default;
    GridSpec(int points, double half) : n(points), half_width(half) { validate(); }

    void validate() const {
        if (n < 32 || !std::has_single_bit(static_cast<unsigned>(n)))
            throw std::invalid_argument("GridSpec: N must be a power of two >= 32");
        if (!(half_width >= 2.0)) throw std::invalid_argument("GridSpec: L must be >= 2");
    }
    double spacing() const { return 2.0 * half_width / n; }
    std::size_t size() const { return static_cast<std::size_t>(n) * n; }
    double coord(int j) const { return -half_width + j * spacing(); }
    cplx point(int j, int m) const { return {coord(j), coord(m)}; }
    /// Signed frequency index of FFT slot j.
    int freq(int j) const { return j < n / 2 ? j : j - n; }
    /// Dual variable zeta = xi_1 + i xi_2 at slot (j, m).
    cplx zeta(int j, int m) const { return cplx(freq(j), freq(m)) / (2.0 * half_width); }
    /// Largest |xi| along an axis.
    double nyquist() const { return n / (4.0 * half_width); }

    bool operator==(const GridSpec& o) const { return n == o.n && half_width == o.half_width; }
};

/// Samples in row-major order: index m * N + j holds z = (-L + jh) + i(-L + mh).
class Field {
public:
    Field() = default;
    explicit Field(const GridSpec& g, cplx fill = 0.0) : grid_(g), data_(g.size(), fill) { g.validate(); }
    Field(const GridSpec& g, std::vector<cplx> samples) : grid_(g), data_(std::move(samples)) {
        g.validate();
        if (data_.size() != g.size()) throw std::invalid_argument("Field: sample count must equal N^2");
    }

    template <class F>
    static Field sample(const GridSpec& g, F&& f) {
        Field out(g);
        for (int m = 0; m < g.n; ++m)
            for (int j = 0; j < g.n; ++j) out(j, m) = f(g.point(j, m));
        return out;
    }

    const GridSpec& grid() const { return grid_; }
    std::size_t size() const { return data_.size(); }
    cplx* data() { return data_.data(); }
    const cplx* data() const { return data_.data(); }
    std::vector<cplx>& samples() { return data_; }
    const std::vector<cplx>& samples() const { return data_; }
    cplx& operator[](std::size_t i) { return data_[i]; }
    const cplx& operator[](std::size_t i) const { return data_[i]; }
    cplx& operator()(int j, int m) { return data_[static_cast<std::size_t>(m) * grid_.n + j]; }
    const cplx& operator()(int j, int m) const { return data_[static_cast<std::size_t>(m) * grid_.n + j]; }

    Field& operator+=(const Field& o) { return zip(o, [](cplx& a, cplx b) { a += b; }); }
    Field& operator-=(const Field& o) { return zip(o, [](cplx& a, cplx b) { a -= b; }); }
    Field& operator*=(const Field& o) { return zip(o, [](cplx& a, cplx b) { a *= b; }); }
    Field& operator*=(cplx s) {
        for (auto& v : data_) v *= s;
        return *this;
    }
    Field& operator+=(cplx s) {
        for (auto& v : data_) v += s;
        return *this;
    }
    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(Field a, const Field& b) { return a *= b; }
    friend Field operator*(Field a, cplx s) { return a *= s; }
    friend Field operator*(cplx s, Field a) { return a *= s; }

    template <class F>
    Field map(F&& f) const {
        Field out(grid_);
        for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = f(data_[i]);
        return out;
    }
    Field conj() const {
        return map([](cplx v) { return std::conj(v); });
    }

    double sup() const {
        double s = 0.0;
        for (auto v : data_) s = std::max(s, std::abs(v));
        return s;
    }
    /// Continuum L2 norm: h * sqrt(sum |f|^2).
    double norm() const {
        double s = 0.0;
        for (auto v : data_) s += std::norm(v);
        return grid_.spacing() * std::sqrt(s);
    }
    cplx mean() const {
        cplx s = 0.0;
        for (auto v : data_) s += v;
        return s / static_cast<double>(data_.size());
    }
    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(),
                           [](cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
    }
    /// Cyclic translation: result(j, m) = f(j + dj, m + dm).
    Field shifted(int dj, int dm) const {
        const int n = grid_.n;
        Field out(grid_);
        for (int m = 0; m < n; ++m) {
            const int ms = ((m + dm) % n + n) % n;
            for (int j = 0; j < n; ++j) out(j, m) = (*this)(((j + dj) % n + n) % n, ms);
        }
        return out;
    }

private:
    template <class Op>
    Field& zip(const Field& o, Op op) {
        if (!(o.grid_ == grid_)) throw std::invalid_argument("Field: grid mismatch");
        for (std::size_t i = 0; i < data_.size(); ++i) op(data_[i], o.data_[i]);
        return *this;
    }

    GridSpec grid_;
    std::vector<cplx> data_;
};

inline double relative_l2_error(const Field& got, const Field& want) {
    return (got - want).norm() / want.norm();
}

/// Unitary DFT coefficients, stored in FFT slot order (see GridSpec::freq).
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(const GridSpec& g) : grid_(g), data_(g.size(), 0.0) {}
    SpectralField(const GridSpec& g, std::vector<cplx> c) : grid_(g), data_(std::move(c)) {
        if (data_.size() != g.size()) throw std::invalid_argument("SpectralField: size mismatch");
    }
    const GridSpec& grid() const { return grid_; }
    cplx* data() { return data_.data(); }
    const cplx* data() const { return data_.data(); }
    std::vector<cplx>& coefficients() { return data_; }
    const std::vector<cplx>& coefficients() const { return data_; }
    cplx& operator()(int j, int m) { return data_[static_cast<std::size_t>(m) * grid_.n + j]; }
    const cplx& operator()(int j, int m) const { return data_[static_cast<std::size_t>(m) * grid_.n + j]; }
    /// Coefficient at signed frequency (n1, n2).
    cplx at_frequency(int n1, int n2) const {
        const int n = grid_.n;
        return (*this)((n1 % n + n) % n, (n2 % n + n) % n);
    }
    double norm2() const {
        double s = 0.0;
        for (auto v : data_) s += std::norm(v);
        return std::sqrt(s);
    }
    /// Multiply each coefficient by symbol(zeta).
    template <class S>
    SpectralField& apply(S&& symbol) {
        const int n = grid_.n;
        for (int m = 0; m < n; ++m)
            for (int j = 0; j < n; ++j) (*this)(j, m) *= symbol(grid_.zeta(j, m));
        return *this;
    }

private:
    GridSpec grid_;
    std::vector<cplx> data_;
};

namespace detail {

class FftPlans {
public:
    static FftPlans& instance() {
        static FftPlans p;
        return p;
    }
    // FFTW planning is not thread-safe; execution with new arrays is.
    fftw_plan get(int n, int sign) {
        std::lock_guard<std::mutex> lock(mu_);
        auto& slot = plans_[{n, sign}];
        if (!slot) {
            std::vector<cplx> a(static_cast<std::size_t>(n) * n), b(a.size());
            slot = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(a.data()),
                                    reinterpret_cast<fftw_complex*>(b.data()), sign,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
            if (!slot) throw std::runtime_error("FFTW planning failed");
        }
        return slot;
    }

private:
    std::mutex mu_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

inline void fft2(const cplx* in, cplx* out, int n, int sign) {
    fftw_plan p = FftPlans::instance().get(n, sign);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
    const double s = 1.0 / n;
    const std::size_t total = static_cast<std::size_t>(n) * n;
    for (std::size_t i = 0; i < total; ++i) out[i] *= s;
}

} // namespace detail

inline SpectralField to_spectral(const Field& f) {
    if (f.size() != f.grid().size()) throw std::invalid_argument("to_spectral: size mismatch");
    SpectralField out(f.grid());
    detail::fft2(f.data(), out.data(), f.grid().n, FFTW_FORWARD);
    return out;
}

inline Field from_spectral(const SpectralField& s) {
    if (s.coefficients().size() != s.grid().size()) throw std::invalid_argument("from_spectral: size mismatch");
    Field out(s.grid());
    detail::fft2(s.data(), out.data(), s.grid().n, FFTW_BACKWARD);
    return out;
}

/// Apply a Fourier multiplier given as a function of zeta.
template <class S>
Field apply_multiplier(const Field& f, S&& symbol) {
    auto s = to_spectral(f);
    s.apply(symbol);
    return from_spectral(s);
}

namespace symbols {
inline cplx d_bar(cplx z) { return PI * I * z; }
inline cplx d(cplx z) { return PI * I * std::conj(z); }
inline cplx beurling(cplx z) { return z == 0.0 ? cplx(0.0) : std::conj(z) / z; }
inline cplx cauchy(cplx z) { return z == 0.0 ? cplx(0.0) : 1.0 / (PI * I * z); }
} // namespace symbols

inline Field d_bar(const Field& f) { return apply_multiplier(f, symbols::d_bar); }
inline Field d(const Field& f) { return apply_multiplier(f, symbols::d); }
inline Field beurling_T(const Field& f) { return apply_multiplier(f, symbols::beurling); }
inline Field cauchy_P(const Field& f) { return apply_multiplier(f, symbols::cauchy); }

/// Pointwise product formed on a 3/2-padded grid and truncated back, which
/// removes the quadratic aliasing of a plain sample-wise product.
inline Field multiply_dealiased(const Field& a, const Field& b) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument("multiply_dealiased: grid mismatch");
    const int n = a.grid().n, M = 3 * n / 2;
    const std::size_t big = static_cast<std::size_t>(M) * M;
    auto pad = [&](const Field& f) {
        const auto s = to_spectral(f);
        std::vector<cplx> c(big, 0.0), x(big);
        for (int m = 0; m < n; ++m)
            for (int j = 0; j < n; ++j) {
                const int fj = a.grid().freq(j), fm = a.grid().freq(m);
                c[static_cast<std::size_t>((fm + M) % M) * M + (fj + M) % M] = s(j, m) * (double(M) / n);
            }
        detail::fft2(c.data(), x.data(), M, FFTW_BACKWARD);
        return x;
    };
    auto pa = pad(a);
    const auto pb = pad(b);
    for (std::size_t i = 0; i < big; ++i) pa[i] *= pb[i];
    std::vector<cplx> c(big);
    detail::fft2(pa.data(), c.data(), M, FFTW_FORWARD);
    SpectralField s(a.grid());
    for (int m = 0; m < n; ++m)
        for (int j = 0; j < n; ++j) {
            const int fj = a.grid().freq(j), fm = a.grid().freq(m);
            s(j, m) = c[static_cast<std::size_t>((fm + M) % M) * M + (fj + M) % M] * (double(n) / M);
        }
    return from_spectral(s);
}

/// e_k(z) = exp(i(kz + conj(kz))) = exp(2i Re(kz)).
inline cplx e_k(cplx k, cplx z) { return std::polar(1.0, 2.0 * (k * z).real()); }

inline Field e_k(const GridSpec& g, cplx k) {
    return Field::sample(g, [k](cplx z) { return e_k(k, z); });
}

/// C-infinity step: 1 for t <= 0, 0 for t >= 1, built from exp(-1/x).
inline double smooth_step_down(double t) {
    if (t <= 0.0) return 1.0;
    if (t >= 1.0) return 0.0;
    const double a = std::exp(-1.0 / (1.0 - t)), b = std::exp(-1.0 / t);
    return a / (a + b);
}

/// Derivative of smooth_step_down.
inline double smooth_step_down_deriv(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double a = std::exp(-1.0 / (1.0 - t)), b = std::exp(-1.0 / t);
    const double da = -a / ((1.0 - t) * (1.0 - t)), db = b / (t * t);
    return (da * (a + b) - a * (da + db)) / ((a + b) * (a + b));
}

/// Radial cutoff: 1 on [0, inner], 0 on [outer, inf), smooth in between.
inline double radial_cutoff(double r, double inner = 1.0, double outer = 1.5) {
    return smooth_step_down((r - inner) / (outer - inner));
}

inline Field window(const GridSpec& g, double inner, double outer) {
    return Field::sample(g, [=](cplx z) { return cplx(radial_cutoff(std::abs(z), inner, outer)); });
}

// --- raw dump --------------------------------------------------------------

namespace detail {
inline void put_le_double(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
    os.write(reinterpret_cast<const char*>(buf), 8);
}
inline double get_le_double(std::istream& is) {
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), 8);
    if (!is) throw std::runtime_error("dump truncated");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}
} // namespace detail

/// Header "N L kind\n" then N^2 (re, im) little-endian doubles, row-major.
inline void write_field(std::ostream& os, const Field& f, const std::string& kind) {
    std::ostringstream hdr;
    hdr.precision(17);
    hdr << f.grid().n << ' ' << f.grid().half_width << ' ' << kind << '\n';
    os << hdr.str();
    for (auto v : f.samples()) {
        detail::put_le_double(os, v.real());
        detail::put_le_double(os, v.imag());
    }
}

inline Field read_field(std::istream& is, std::string* kind = nullptr) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("field dump: missing header");
    std::istringstream hdr(line);
    int n;
    double L;
    std::string k;
    if (!(hdr >> n >> L >> k)) throw std::runtime_error("field dump: bad header");
    if (kind) *kind = k;
    GridSpec g(n, L);
    std::vector<cplx> v(g.size());
    for (auto& c : v) {
        const double re = detail::get_le_double(is);
        c = {re, detail::get_le_double(is)};
    }
    return Field(g, std::move(v));
}

inline void save_field(const std::string& path, const Field& f, const std::string& kind) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    write_field(os, f, kind);
}

inline Field load_field(const std::string& path, std::string* kind = nullptr) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    return read_field(is, kind);
}

} // namespace cgolab
