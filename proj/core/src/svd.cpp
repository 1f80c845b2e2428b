#include "yescert/error.hpp"
#include "yescert/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace yescert {

namespace {

constexpr int kMaxSweeps = 80;

// Column-major scratch matrix; the SVD kernels work column-wise.
struct ColMajor {
    std::size_t rows;
    std::size_t cols;
    std::vector<double> v;

    double* col(std::size_t c) { return v.data() + c * rows; }
    const double* col(std::size_t c) const { return v.data() + c * rows; }
};

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

// Householder reflector for x[0..n): on return x[0] holds -sign*||x|| and
// v (stored in place of x with v[0] = 1 implied by `head`) satisfies
// (I - tau v v^T) x = beta e1.
struct Reflector {
    std::vector<double> v;
    double tau = 0.0;
};

// Thin SVD of a column-major tall matrix (rows >= cols).
// With want_u false the returned u is an empty placeholder (1 x 1).
SvdResult tall_svd(ColMajor a, const Matrix& original, bool want_u) {
    const std::size_t m = a.rows;
    const std::size_t n = a.cols;

    // Householder QR: a <- R in the upper triangle. Trailing columns far below
    // rounding level are flushed to zero; reflecting them would divide by a
    // subnormal norm.
    const double eps = std::numeric_limits<double>::epsilon();
    const double flush = eps * eps * std::sqrt(dot(a.v.data(), a.v.data(), a.v.size()));
    std::vector<Reflector> reflectors(n);
    for (std::size_t k = 0; k < n; ++k) {
        double* ck = a.col(k);
        const std::size_t len = m - k;
        double norm = std::sqrt(dot(ck + k, ck + k, len));
        Reflector& h = reflectors[k];
        if (norm <= flush) {
            std::fill(ck + k, ck + m, 0.0);
            h.tau = 0.0;
            continue;
        }
        h.v.assign(ck + k, ck + m);
        const double alpha = ck[k] >= 0.0 ? -norm : norm;
        h.v[0] -= alpha;
        const double vnorm_sq = dot(h.v.data(), h.v.data(), len);
        h.tau = vnorm_sq > 0.0 ? 2.0 / vnorm_sq : 0.0;
        ck[k] = alpha;
        std::fill(ck + k + 1, ck + m, 0.0);
        for (std::size_t j = k + 1; j < n; ++j) {
            double* cj = a.col(j) + k;
            const double f = h.tau * dot(h.v.data(), cj, len);
            for (std::size_t i = 0; i < len; ++i) cj[i] -= f * h.v[i];
        }
    }

    // One-sided Jacobi on the n x n triangular factor W; V accumulates rotations.
    ColMajor w{n, n, std::vector<double>(n * n, 0.0)};
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i <= j; ++i) w.col(j)[i] = a.col(j)[i];
    ColMajor vmat{n, n, std::vector<double>(n * n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) vmat.col(i)[i] = 1.0;

    const double tol = std::numeric_limits<double>::epsilon() * static_cast<double>(std::max<std::size_t>(n, 4));
    // Columns at rounding level relative to the whole matrix carry no rank;
    // rotating them against each other only shuffles noise and never settles.
    double total_sq = 0.0;
    for (double value : w.v) total_sq += value * value;
    const double negligible_sq = tol * tol * total_sq;
    bool converged = n < 2;
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        converged = true;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double* wp = w.col(p);
                double* wq = w.col(q);
                const double alpha = dot(wp, wp, n);
                const double beta = dot(wq, wq, n);
                const double gamma = dot(wp, wq, n);
                if (alpha <= negligible_sq || beta <= negligible_sq) continue;
                if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
                converged = false;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
                const double c = 1.0 / std::hypot(1.0, t);
                const double s = c * t;
                for (std::size_t i = 0; i < n; ++i) {
                    const double x = wp[i];
                    const double y = wq[i];
                    wp[i] = c * x - s * y;
                    wq[i] = s * x + c * y;
                }
                double* vp = vmat.col(p);
                double* vq = vmat.col(q);
                for (std::size_t i = 0; i < n; ++i) {
                    const double x = vp[i];
                    const double y = vq[i];
                    vp[i] = c * x - s * y;
                    vq[i] = s * x + c * y;
                }
            }
        }
    }
    if (!converged) {
        throw NumericalError("svd: Jacobi iteration did not converge for " + original.shape_string() +
                             " matrix");
    }

    std::vector<double> sigma(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double sq = dot(w.col(j), w.col(j), n);
        sigma[j] = sq <= negligible_sq ? 0.0 : std::sqrt(sq);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return sigma[i] > sigma[j]; });

    if (!want_u) {
        SvdResult out{Matrix(1, 1), std::vector<double>(n), Matrix(n, n)};
        for (std::size_t j = 0; j < n; ++j) {
            out.s[j] = sigma[order[j]];
            for (std::size_t i = 0; i < n; ++i) out.v(i, j) = vmat.col(order[j])[i];
        }
        return out;
    }

    // Left singular vectors of R, padded to m rows, in sorted order.
    ColMajor u{m, n, std::vector<double>(m * n, 0.0)};
    std::vector<bool> filled(n, false);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = order[j];
        if (sigma[src] > 0.0) {
            const double* ws = w.col(src);
            for (std::size_t i = 0; i < n; ++i) u.col(j)[i] = ws[i] / sigma[src];
            filled[j] = true;
        }
    }
    // Zero singular values leave their columns undetermined; complete
    // them to an orthonormal set inside the first n coordinates.
    for (std::size_t j = 0; j < n; ++j) {
        if (filled[j]) continue;
        for (std::size_t e = 0; e < n && !filled[j]; ++e) {
            std::vector<double> cand(n, 0.0);
            cand[e] = 1.0;
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t k = 0; k < n; ++k) {
                    if (!filled[k]) continue;
                    const double proj = dot(cand.data(), u.col(k), n);
                    for (std::size_t i = 0; i < n; ++i) cand[i] -= proj * u.col(k)[i];
                }
            }
            const double nrm = std::sqrt(dot(cand.data(), cand.data(), n));
            if (nrm > 0.5) {
                for (std::size_t i = 0; i < n; ++i) u.col(j)[i] = cand[i] / nrm;
                filled[j] = true;
            }
        }
    }

    // U = Q * U_R: apply reflectors in reverse order.
    for (std::size_t kk = n; kk-- > 0;) {
        const Reflector& h = reflectors[kk];
        if (h.tau == 0.0) continue;
        const std::size_t len = m - kk;
        for (std::size_t j = 0; j < n; ++j) {
            double* cj = u.col(j) + kk;
            const double f = h.tau * dot(h.v.data(), cj, len);
            for (std::size_t i = 0; i < len; ++i) cj[i] -= f * h.v[i];
        }
    }

    SvdResult out{Matrix(m, n), std::vector<double>(n), Matrix(n, n)};
    for (std::size_t j = 0; j < n; ++j) {
        out.s[j] = sigma[order[j]];
        for (std::size_t i = 0; i < m; ++i) out.u(i, j) = u.col(j)[i];
        for (std::size_t i = 0; i < n; ++i) out.v(i, j) = vmat.col(order[j])[i];
    }
    return out;
}

ColMajor to_col_major(const Matrix& a, bool transposed) {
    if (!transposed) {
        ColMajor c{a.rows(), a.cols(), std::vector<double>(a.size())};
        for (std::size_t r = 0; r < a.rows(); ++r)
            for (std::size_t j = 0; j < a.cols(); ++j) c.col(j)[r] = a(r, j);
        return c;
    }
    // Column-major storage of a^T is the row-major storage of a.
    return ColMajor{a.cols(), a.rows(), std::vector<double>(a.data().begin(), a.data().end())};
}

} // namespace

SvdResult svd(const Matrix& a) {
    if (!a.all_finite()) throw NumericalError("svd: non-finite entries in " + a.shape_string() + " matrix");
    if (a.rows() >= a.cols()) return tall_svd(to_col_major(a, false), a, true);
    SvdResult t = tall_svd(to_col_major(a, true), a, true);
    return SvdResult{std::move(t.v), std::move(t.s), std::move(t.u)};
}

double default_rcond(const Matrix& a) noexcept {
    return 1e-12 * static_cast<double>(std::max(a.rows(), a.cols()));
}

Matrix pinv(const Matrix& a, double rcond) {
    if (!(rcond > 0.0)) throw NumericalError("pinv: rcond must be positive");
    const SvdResult f = svd(a);
    Matrix out(a.cols(), a.rows());
    if (f.s.empty() || f.s.front() == 0.0) return out;
    const double cutoff = rcond * f.s.front();
    for (std::size_t k = 0; k < f.s.size(); ++k) {
        if (f.s[k] <= cutoff) break;
        const double inv = 1.0 / f.s[k];
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double vik = f.v(i, k) * inv;
            if (vik == 0.0) continue;
            double* dst = out.row(i).data();
            for (std::size_t j = 0; j < a.rows(); ++j) dst[j] += vik * f.u(j, k);
        }
    }
    return out;
}

Matrix pinv(const Matrix& a) { return pinv(a, default_rcond(a)); }

RowSpaceProjector::RowSpaceProjector(const Matrix& a, double rcond) : cols_(a.cols()) {
    if (!(rcond > 0.0)) throw NumericalError("row space: rcond must be positive");
    if (!a.all_finite()) throw NumericalError("row space: non-finite entries in " + a.shape_string() + " matrix");
    // All-zero rows do not change the row space; ReLU outputs and one-hot style
    // targets have many of them, and dropping them shrinks the decomposition.
    std::vector<double> kept;
    std::size_t kept_rows = 0;
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const auto row = a.row(r);
        if (std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; })) continue;
        kept.insert(kept.end(), row.begin(), row.end());
        ++kept_rows;
    }
    if (kept_rows == 0) return;
    const Matrix compact(kept_rows, cols_, std::move(kept));
    // Only the right singular vectors are needed.
    SvdResult f = compact.rows() >= compact.cols() ? tall_svd(to_col_major(compact, false), a, false)
                                                   : tall_svd(to_col_major(compact, true), a, true);
    const Matrix& v = compact.rows() >= compact.cols() ? f.v : f.u;
    if (f.s.empty() || f.s.front() == 0.0) return;
    const double cutoff = rcond * f.s.front();
    while (rank_ < f.s.size() && f.s[rank_] > cutoff) ++rank_;
    basis_.resize(rank_ * cols_);
    for (std::size_t k = 0; k < rank_; ++k)
        for (std::size_t i = 0; i < cols_; ++i) basis_[k * cols_ + i] = v(i, k);
}

Matrix RowSpaceProjector::project(const Matrix& target) const {
    if (target.cols() != cols_) {
        throw DimensionError("row-space projection: target " + target.shape_string() + " has " +
                             std::to_string(target.cols()) + " columns, projector expects " +
                             std::to_string(cols_));
    }
    Matrix out(target.rows(), cols_);
    std::vector<double> coeff(rank_);
    // Entries at the rounding level of the product are flushed to exact zeros:
    // a basis vector that should vanish on a coordinate typically carries
    // ~1e-16 there, and downstream rank decisions are scale-free, so such
    // residue would otherwise be promoted to a genuine direction.
    const double noise = 8.0 * static_cast<double>(rank_ + 1) * std::numeric_limits<double>::epsilon();
    for (std::size_t r = 0; r < target.rows(); ++r) {
        const auto t = target.row(r);
        for (std::size_t k = 0; k < rank_; ++k) coeff[k] = dot(t.data(), basis_.data() + k * cols_, cols_);
        double* dst = out.row(r).data();
        for (std::size_t k = 0; k < rank_; ++k) {
            const double ck = coeff[k];
            const double* b = basis_.data() + k * cols_;
            for (std::size_t i = 0; i < cols_; ++i) dst[i] += ck * b[i];
        }
        const double floor = noise * std::sqrt(dot(t.data(), t.data(), cols_));
        for (std::size_t i = 0; i < cols_; ++i)
            if (std::abs(dst[i]) <= floor) dst[i] = 0.0;
    }
    return out;
}

} // namespace yescert
