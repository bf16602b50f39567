#include "fredholm/polar_fd.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "fredholm/error.hpp"

namespace fredholm {

namespace {

// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwDeleter {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

class RingTransform {
public:
    RingTransform(std::size_t rows, std::size_t n) : rows_(rows), n_(n), half_(n / 2 + 1) {
        real_.reset(static_cast<double*>(fftw_malloc(sizeof(double) * rows_ * n_)));
        spec_.reset(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * rows_ * half_)));
        if (!real_ || !spec_) throw std::bad_alloc();
        const int len = static_cast<int>(n_);
        const int howmany = static_cast<int>(rows_);
        const std::lock_guard lock(planner_mutex());
        forward_ = fftw_plan_many_dft_r2c(1, &len, howmany, real_.get(), nullptr, 1, len, spec_.get(), nullptr, 1,
                                          static_cast<int>(half_), FFTW_ESTIMATE);
        backward_ = fftw_plan_many_dft_c2r(1, &len, howmany, spec_.get(), nullptr, 1, static_cast<int>(half_),
                                           real_.get(), nullptr, 1, len, FFTW_ESTIMATE);
        if (!forward_ || !backward_) throw NumericalError("FFTW planning failed");
    }
    RingTransform(const RingTransform&) = delete;
    RingTransform& operator=(const RingTransform&) = delete;
    ~RingTransform() {
        const std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
    }

    double* real(std::size_t row) { return real_.get() + row * n_; }
    std::complex<double>* spectrum(std::size_t row) {
        return reinterpret_cast<std::complex<double>*>(spec_.get() + row * half_);
    }
    std::size_t modes() const noexcept { return half_; }
    void forward() { fftw_execute(forward_); }
    void backward() { fftw_execute(backward_); }

private:
    std::size_t rows_;
    std::size_t n_;
    std::size_t half_;
    std::unique_ptr<double, FftwDeleter> real_;
    std::unique_ptr<fftw_complex, FftwDeleter> spec_;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

struct Stencil {
    std::size_t nr;
    std::size_t nt;
    double dr;
    double dth;
    // coefficients of u_{i-1}, u_i, u_{i+1} for ring i (index 0 unused)
    std::vector<double> lower, diag, upper, angular;

    Stencil(std::size_t nr_, std::size_t nt_)
        : nr(nr_),
          nt(nt_),
          dr(1.0 / static_cast<double>(nr_)),
          dth(2.0 * std::numbers::pi / static_cast<double>(nt_)),
          lower(nr_, 0.0),
          diag(nr_, 0.0),
          upper(nr_, 0.0),
          angular(nr_, 0.0) {
        const double h2 = dr * dr;
        for (std::size_t i = 1; i < nr; ++i) {
            const double r = static_cast<double>(i) * dr;
            lower[i] = 1.0 / h2 - 1.0 / (2.0 * r * dr);
            diag[i] = -2.0 / h2;
            upper[i] = 1.0 / h2 + 1.0 / (2.0 * r * dr);
            angular[i] = 1.0 / (r * r * dth * dth);
        }
    }
};

// Solves L u = rhs on rings 1..Nr-1 with u_Nr = boundary and u_0 = mean(u_1).
// `rhs` and the result are (Nr-1) x Nt, row-major.
void solve_rings(const Stencil& st, RingTransform& fft, const std::vector<double>& rhs,
                 std::span<const double> boundary, std::vector<double>& out) {
    const std::size_t interior = st.nr - 1;
    std::copy(rhs.begin(), rhs.end(), fft.real(0));
    std::copy(boundary.begin(), boundary.end(), fft.real(interior));
    fft.forward();

    std::vector<std::complex<double>> cprime(interior);
    std::vector<std::complex<double>> dprime(interior);
    const std::complex<double>* bnd = fft.spectrum(interior);
    for (std::size_t m = 0; m < fft.modes(); ++m) {
        const double s = std::sin(0.5 * static_cast<double>(m) * st.dth);
        const double lambda = -4.0 / (st.dth * st.dth) * s * s;
        // Thomas sweep; row k is ring k+1
        for (std::size_t k = 0; k < interior; ++k) {
            const std::size_t i = k + 1;
            const double r = static_cast<double>(i) * st.dr;
            double d = st.diag[i] + lambda / (r * r);
            if (i == 1 && m == 0) d += st.lower[1];  // center value is the ring-1 mean
            std::complex<double> b = fft.spectrum(k)[m];
            if (i == st.nr - 1) b -= st.upper[i] * bnd[m];
            const double a = (i == 1) ? 0.0 : st.lower[i];
            const double c = (i == st.nr - 1) ? 0.0 : st.upper[i];
            if (k == 0) {
                cprime[k] = c / d;
                dprime[k] = b / d;
            } else {
                const std::complex<double> denom = d - a * cprime[k - 1];
                cprime[k] = c / denom;
                dprime[k] = (b - a * dprime[k - 1]) / denom;
            }
        }
        fft.spectrum(interior - 1)[m] = dprime[interior - 1];
        for (std::size_t k = interior - 1; k-- > 0;) {
            fft.spectrum(k)[m] = dprime[k] - cprime[k] * fft.spectrum(k + 1)[m];
        }
    }
    fft.backward();
    const double scale = 1.0 / static_cast<double>(st.nt);
    out.resize(interior * st.nt);
    for (std::size_t k = 0; k < interior; ++k) {
        const double* row = fft.real(k);
        for (std::size_t j = 0; j < st.nt; ++j) out[k * st.nt + j] = row[j] * scale;
    }
}

// Residual of the stencil at every interior node, plus the scaled max.
double stencil_residual(const Stencil& st, const PolarGridSolution& u, std::vector<double>& res) {
    const std::size_t nt = st.nt;
    res.assign((st.nr - 1) * nt, 0.0);
    double worst = 0.0;
    double fmax = 1.0;
    for (std::size_t j = 0; j < nt; ++j) fmax = std::max(fmax, std::fabs(u.at(st.nr, j)));
    for (std::size_t i = 1; i < st.nr; ++i) {
        const double diag = std::fabs(st.diag[i] - 2.0 * st.angular[i]);
        for (std::size_t j = 0; j < nt; ++j) {
            const std::size_t jp = (j + 1) % nt;
            const std::size_t jm = (j + nt - 1) % nt;
            const double r = st.lower[i] * u.at(i - 1, j) + st.diag[i] * u.at(i, j) + st.upper[i] * u.at(i + 1, j) +
                             st.angular[i] * (u.at(i, jp) - 2.0 * u.at(i, j) + u.at(i, jm));
            res[(i - 1) * nt + j] = r;
            worst = std::max(worst, std::fabs(r) / diag);
        }
    }
    return worst / fmax;
}

void set_center(PolarGridSolution& u) {
    const std::size_t nt = u.angular_cells();
    double sum = 0.0;
    for (std::size_t j = 0; j < nt; ++j) sum += u.at(1, j);
    const double c = sum / static_cast<double>(nt);
    for (std::size_t j = 0; j < nt; ++j) u.at(0, j) = c;
}

}  // namespace

PolarGridSolution::PolarGridSolution(std::size_t nr, std::size_t ntheta)
    : nr_(nr), ntheta_(ntheta), values_((nr + 1) * ntheta, 0.0) {}

double PolarGridSolution::dr() const noexcept { return 1.0 / static_cast<double>(nr_); }

double PolarGridSolution::dtheta() const noexcept {
    return 2.0 * std::numbers::pi / static_cast<double>(ntheta_);
}

PolarGridSolution solve_fd(const ScalarFunction& boundary, const PolarFdOptions& options) {
    const std::size_t nr = options.radial_cells;
    const std::size_t nt = options.angular_cells;
    if (nr < 8 || nt < 8) throw ValidationError("finite-difference grid needs Nr, Ntheta >= 8");
    if (!(options.tol > 0.0)) throw ValidationError("solver tolerance must be positive");
    if (!boundary) throw ValidationError("finite-difference solve needs boundary data");

    const Stencil st(nr, nt);
    PolarGridSolution u(nr, nt);
    std::vector<double> bnd(nt);
    for (std::size_t j = 0; j < nt; ++j) {
        bnd[j] = boundary(u.angle(j));
        if (!std::isfinite(bnd[j])) {
            throw NumericalError("boundary data is not finite at theta = " + std::to_string(u.angle(j)));
        }
        u.at(nr, j) = bnd[j];
    }

    RingTransform fft(nr, nt);
    std::vector<double> rhs((nr - 1) * nt, 0.0);
    std::vector<double> sol;
    solve_rings(st, fft, rhs, bnd, sol);
    for (std::size_t i = 1; i < nr; ++i) {
        for (std::size_t j = 0; j < nt; ++j) u.at(i, j) = sol[(i - 1) * nt + j];
    }
    set_center(u);
    u.iterations = 1;

    const std::vector<double> zero_boundary(nt, 0.0);
    std::vector<double> res;
    for (;;) {
        u.residual = stencil_residual(st, u, res);
        if (!std::isfinite(u.residual)) throw NumericalError("finite-difference solve produced non-finite values");
        if (u.residual <= options.tol) break;
        if (u.iterations > options.max_refinements) {
            throw NumericalError("finite-difference solve did not converge after " + std::to_string(u.iterations) +
                                 " sweeps (residual " + std::to_string(u.residual) + ")");
        }
        for (double& r : res) r = -r;
        solve_rings(st, fft, res, zero_boundary, sol);
        for (std::size_t i = 1; i < nr; ++i) {
            for (std::size_t j = 0; j < nt; ++j) u.at(i, j) += sol[(i - 1) * nt + j];
        }
        set_center(u);
        ++u.iterations;
    }
    return u;
}

double fd_residual(const PolarGridSolution& solution) {
    const Stencil st(solution.radial_cells(), solution.angular_cells());
    std::vector<double> res;
    return stencil_residual(st, solution, res);
}

FieldComparison compare_fields(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ValidationError("compared fields have different point counts (" + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()) + ")");
    }
    if (a.empty()) throw ValidationError("compared fields are empty");
    FieldComparison out;
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = std::fabs(a[k] - b[k]);
        sum += d;
        if (d > out.max_abs) {
            out.max_abs = d;
            out.argmax = k;
        }
    }
    out.mean_abs = sum / static_cast<double>(a.size());
    return out;
}

}  // namespace fredholm
