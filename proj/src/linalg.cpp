#include "tdb/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tdb/rng.hpp"

namespace tdb {

void QuadratureWeights::validate() const {
    for (double v : wx)
        if (!(v > 0.0)) throw Error("QuadratureWeights: non-positive spatial weight");
    for (double v : wxi)
        if (!(v > 0.0)) throw Error("QuadratureWeights: non-positive sample weight");
    double s = 0.0;
    for (double v : wxi) s += v;
    if (std::abs(s - 1.0) > 1e-12) throw Error("QuadratureWeights: sample weights sum to " + std::to_string(s) + ", expected 1");
}

QuadratureWeights QuadratureWeights::monte_carlo(std::vector<double> wx, std::size_t samples) {
    QuadratureWeights w;
    w.wx = std::move(wx);
    w.wxi.assign(samples, 1.0 / static_cast<double>(samples));
    return w;
}

namespace linalg {

namespace {
constexpr double kRankTol = 1e-12;  // singular value treated as zero below kRankTol * sigma_max

void sign_normalize_column(Matrix& m, std::size_t j) {
    std::size_t imax = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double v = std::abs(m(i, j));
        if (v > best) {
            best = v;
            imax = i;
        }
    }
    if (m(imax, j) < 0.0)
        for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) = -m(i, j);
}
}  // namespace

Matrix weighted_inner(const Matrix& a, const Matrix& b, std::span<const double> w) {
    if (a.rows() != b.rows() || a.rows() != w.size())
        throw DimensionError("weighted_inner: rows(A)=" + std::to_string(a.rows()) + " rows(B)=" + std::to_string(b.rows()) +
                             " len(w)=" + std::to_string(w.size()));
    Matrix out(a.cols(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        const double* bj = b.col(j);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double* ai = a.col(i);
            double acc = 0.0;
            for (std::size_t k = 0; k < w.size(); ++k) acc += ai[k] * w[k] * bj[k];
            out(i, j) = acc;
        }
    }
    return out;
}

double weighted_frobenius(const Matrix& v, std::span<const double> wx, std::span<const double> wxi) {
    if (v.rows() != wx.size() || v.cols() != wxi.size())
        throw DimensionError("weighted_frobenius: shape " + std::to_string(v.rows()) + "x" + std::to_string(v.cols()) +
                             " vs weights " + std::to_string(wx.size()) + "/" + std::to_string(wxi.size()));
    double acc = 0.0;
    for (std::size_t j = 0; j < v.cols(); ++j) {
        const double* vj = v.col(j);
        double colacc = 0.0;
        for (std::size_t i = 0; i < wx.size(); ++i) colacc += wx[i] * vj[i] * vj[i];
        acc += wxi[j] * colacc;
    }
    return std::sqrt(acc);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("matmul: inner dims " + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()));
    Matrix out(a.rows(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        double* oj = out.col(j);
        const double* bj = b.col(j);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double bkj = bj[k];
            const double* ak = a.col(k);
            for (std::size_t i = 0; i < a.rows(); ++i) oj[i] += ak[i] * bkj;
        }
    }
    return out;
}

Matrix matmul_bt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw DimensionError("matmul_bt: inner dims mismatch");
    Matrix out(a.rows(), b.rows());
    for (std::size_t k = 0; k < a.cols(); ++k) {
        const double* ak = a.col(k);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double bjk = b(j, k);
            double* oj = out.col(j);
            for (std::size_t i = 0; i < a.rows(); ++i) oj[i] += ak[i] * bjk;
        }
    }
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t i = 0; i < a.rows(); ++i) out(j, i) = a(i, j);
    return out;
}

Matrix scale_rows(const Matrix& a, std::span<const double> d) {
    if (a.rows() != d.size()) throw DimensionError("scale_rows: length mismatch");
    Matrix out(a.rows(), a.cols());
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t i = 0; i < a.rows(); ++i) out(i, j) = d[i] * a(i, j);
    return out;
}

double frobenius(const Matrix& a) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t i = 0; i < a.rows(); ++i) acc += a(i, j) * a(i, j);
    return std::sqrt(acc);
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t i = 0; i < a.rows(); ++i) m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

// ---------------------------------------------------------------------------

PivotedQR pivoted_qr(const Matrix& m) {
    const std::size_t rows = m.rows(), cols = m.cols();
    if (rows == 0 || cols == 0) throw DimensionError("pivoted_qr: empty matrix");
    const std::size_t steps = std::min(rows, cols);

    Matrix a = m;  // upper part becomes R, below-diagonal holds reflector tails
    std::vector<std::size_t> pivot(cols);
    std::iota(pivot.begin(), pivot.end(), std::size_t{0});
    std::vector<double> tau(steps, 0.0);
    std::vector<double> vhead(steps, 0.0);

    for (std::size_t t = 0; t < steps; ++t) {
        std::size_t jbest = t;
        double nbest = -1.0;
        for (std::size_t j = t; j < cols; ++j) {
            double nj = 0.0;
            for (std::size_t i = t; i < rows; ++i) nj += a(i, j) * a(i, j);
            if (nj > nbest) {
                nbest = nj;
                jbest = j;
            }
        }
        if (jbest != t) {
            for (std::size_t i = 0; i < rows; ++i) std::swap(a(i, t), a(i, jbest));
            std::swap(pivot[t], pivot[jbest]);
        }

        double norm = std::sqrt(std::max(nbest, 0.0));
        if (norm == 0.0) break;  // all remaining columns are zero

        const double alpha = (a(t, t) >= 0.0) ? -norm : norm;
        const double v0 = a(t, t) - alpha;
        double vnorm2 = v0 * v0;
        for (std::size_t i = t + 1; i < rows; ++i) vnorm2 += a(i, t) * a(i, t);
        if (vnorm2 > 0.0) {
            tau[t] = 2.0 / vnorm2;
            vhead[t] = v0;
            for (std::size_t j = t + 1; j < cols; ++j) {
                double dot = v0 * a(t, j);
                for (std::size_t i = t + 1; i < rows; ++i) dot += a(i, t) * a(i, j);
                dot *= tau[t];
                a(t, j) -= dot * v0;
                for (std::size_t i = t + 1; i < rows; ++i) a(i, j) -= dot * a(i, t);
            }
        }
        a(t, t) = alpha;  // R(t,t); the reflector tail stays in a(t+1:, t)
    }

    PivotedQR out;
    out.pivot = std::move(pivot);
    out.r = Matrix(steps, cols);
    for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t i = 0; i <= std::min(j, steps - 1); ++i) out.r(i, j) = a(i, j);

    out.q = Matrix(rows, steps);
    for (std::size_t c = 0; c < steps; ++c) out.q(c, c) = 1.0;
    for (std::size_t tt = steps; tt-- > 0;) {
        if (tau[tt] == 0.0) continue;
        for (std::size_t c = 0; c < steps; ++c) {
            double dot = vhead[tt] * out.q(tt, c);
            for (std::size_t i = tt + 1; i < rows; ++i) dot += a(i, tt) * out.q(i, c);
            dot *= tau[tt];
            out.q(tt, c) -= dot * vhead[tt];
            for (std::size_t i = tt + 1; i < rows; ++i) out.q(i, c) -= dot * a(i, tt);
        }
    }
    return out;
}

EigResult sym_eig(const Matrix& c) {
    const std::size_t n = c.rows();
    if (c.cols() != n) throw DimensionError("sym_eig: matrix not square");
    if (n == 0) throw DimensionError("sym_eig: empty matrix");

    const double scale = std::max(1.0, c.max_abs());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(c(i, j) - c(j, i)) > 1e-12 * scale)
                throw NotSymmetricError("sym_eig: asymmetry " + std::to_string(std::abs(c(i, j) - c(j, i))) + " at (" +
                                        std::to_string(i) + "," + std::to_string(j) + ")");

    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (c(i, j) + c(j, i));
    Matrix v = Matrix::identity(n);

    double normf = frobenius(a);
    bool converged = (normf == 0.0);
    for (int sweep = 0; sweep < 64 && !converged; ++sweep) {
        double off2 = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off2 += a(p, q) * a(p, q);
        if (std::sqrt(2.0 * off2) <= 1e-15 * normf) {
            converged = true;
            break;
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0) ? 1.0 / (theta + std::sqrt(theta * theta + 1.0))
                                                : -1.0 / (-theta + std::sqrt(theta * theta + 1.0));
                const double cs = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * cs;
                const double app = a(p, p), aqq = a(q, q);
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = cs * akp - sn * akq;
                    a(p, k) = a(k, p);
                    a(k, q) = sn * akp + cs * akq;
                    a(q, k) = a(k, q);
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = cs * vkp - sn * vkq;
                    v(k, q) = sn * vkp + cs * vkq;
                }
            }
        }
    }
    if (!converged) {
        // final check after the sweep cap
        double off2 = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off2 += a(p, q) * a(p, q);
        if (std::sqrt(2.0 * off2) > 1e-12 * normf) throw Error("sym_eig: Jacobi iteration failed to converge");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    EigResult out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
        sign_normalize_column(out.vectors, k);
    }
    return out;
}

double WeightedSVD::truncation_error() const {
    double acc = 0.0;
    for (std::size_t i = sigma.size(); i < sigma_full.size(); ++i) acc += sigma_full[i] * sigma_full[i];
    return std::sqrt(acc);
}

WeightedSVD truncated_svd_weighted(const Matrix& v, std::span<const double> wx, std::span<const double> wxi, std::size_t rank) {
    const std::size_t n = v.rows(), s = v.cols();
    if (n != wx.size() || s != wxi.size()) throw DimensionError("truncated_svd_weighted: weight lengths do not match matrix");
    if (rank == 0 || rank > std::min(n, s))
        throw DimensionError("truncated_svd_weighted: rank " + std::to_string(rank) + " exceeds min(n,s)=" +
                             std::to_string(std::min(n, s)));

    WeightedSVD out;
    const bool sample_side = (s <= n);
    const std::size_t k = sample_side ? s : n;

    // correlation matrix of the smaller side, symmetrically weighted
    Matrix corr = sample_side ? weighted_inner(v, v, wx) : Matrix();
    if (!sample_side) {
        // G_ik = sum_j V_ij wxi_j V_kj
        corr = Matrix(n, n);
        for (std::size_t j = 0; j < s; ++j) {
            const double* vj = v.col(j);
            const double wj = wxi[j];
            for (std::size_t col = 0; col < n; ++col) {
                const double vcj = vj[col] * wj;
                for (std::size_t row = 0; row < n; ++row) corr(row, col) += vj[row] * vcj;
            }
        }
    }
    std::vector<double> sqw(k);
    for (std::size_t i = 0; i < k; ++i) sqw[i] = std::sqrt(sample_side ? wxi[i] : wx[i]);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < k; ++i) corr(i, j) *= sqw[i] * sqw[j];

    EigResult eig = sym_eig(corr);

    // the correlation route cannot resolve eigenvalues below its own rounding
    // floor; directions there are indistinguishable from zero and reported as
    // exact zeros
    const double lmax = std::max(eig.values.front(), 0.0);
    const double gram_floor = 64.0 * static_cast<double>(k) * 2.2e-16 * lmax;
    out.sigma_full.resize(k);
    std::size_t achievable = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double li = eig.values[i];
        if (li > gram_floor && li > kRankTol * kRankTol * lmax) {
            out.sigma_full[i] = std::sqrt(li);
            ++achievable;
        } else {
            out.sigma_full[i] = 0.0;
        }
    }
    if (achievable < rank)
        throw RankDeficiencyError("truncated_svd_weighted: requested rank " + std::to_string(rank) + " but only " +
                                      std::to_string(achievable) + " directions are numerically independent",
                                  achievable);

    out.sigma.assign(out.sigma_full.begin(), out.sigma_full.begin() + rank);

    if (sample_side) {
        out.y = Matrix(s, rank);
        for (std::size_t c = 0; c < rank; ++c)
            for (std::size_t j = 0; j < s; ++j) out.y(j, c) = eig.vectors(j, c) / sqw[j];
        Matrix b = out.y;  // W_xi Y
        for (std::size_t c = 0; c < rank; ++c)
            for (std::size_t j = 0; j < s; ++j) b(j, c) *= wxi[j];
        out.u = matmul(v, b);
        for (std::size_t c = 0; c < rank; ++c) {
            const double inv = 1.0 / out.sigma[c];
            for (std::size_t i = 0; i < n; ++i) out.u(i, c) *= inv;
        }
    } else {
        out.u = Matrix(n, rank);
        for (std::size_t c = 0; c < rank; ++c)
            for (std::size_t i = 0; i < n; ++i) out.u(i, c) = eig.vectors(i, c) / sqw[i];
        Matrix b = out.u;  // W_x U
        for (std::size_t c = 0; c < rank; ++c)
            for (std::size_t i = 0; i < n; ++i) b(i, c) *= wx[i];
        out.y = matmul(transpose(v), b);
        for (std::size_t c = 0; c < rank; ++c) {
            const double inv = 1.0 / out.sigma[c];
            for (std::size_t j = 0; j < s; ++j) out.y(j, c) *= inv;
        }
    }

    // deterministic sign: largest-magnitude entry of each spatial mode positive
    for (std::size_t c = 0; c < rank; ++c) {
        std::size_t imax = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double m = std::abs(out.u(i, c));
            if (m > best) {
                best = m;
                imax = i;
            }
        }
        if (out.u(imax, c) < 0.0) {
            for (std::size_t i = 0; i < n; ++i) out.u(i, c) = -out.u(i, c);
            for (std::size_t j = 0; j < s; ++j) out.y(j, c) = -out.y(j, c);
        }
    }
    return out;
}

WeightedSVD truncated_svd_weighted(const Matrix& v, const QuadratureWeights& w, std::size_t rank) {
    return truncated_svd_weighted(v, w.wx, w.wxi, rank);
}

Reorth reorthonormalize(const Matrix& u, std::span<const double> w) {
    const std::size_t n = u.rows(), r = u.cols();
    if (n != w.size()) throw DimensionError("reorthonormalize: weight length mismatch");

    std::vector<double> orig_norm(r);
    for (std::size_t j = 0; j < r; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += w[i] * u(i, j) * u(i, j);
        orig_norm[j] = std::sqrt(acc);
    }

    auto mgs_pass = [&](const Matrix& in, Matrix& q, Matrix& rfac) {
        q = in;
        rfac = Matrix(r, r);
        for (std::size_t j = 0; j < r; ++j) {
            for (std::size_t i = 0; i < j; ++i) {
                double c = 0.0;
                for (std::size_t k = 0; k < n; ++k) c += w[k] * q(k, i) * q(k, j);
                rfac(i, j) = c;
                for (std::size_t k = 0; k < n; ++k) q(k, j) -= c * q(k, i);
            }
            double nrm = 0.0;
            for (std::size_t k = 0; k < n; ++k) nrm += w[k] * q(k, j) * q(k, j);
            nrm = std::sqrt(nrm);
            if (nrm < kRankTol * orig_norm[j] || nrm == 0.0)
                throw RankDeficiencyError("reorthonormalize: column " + std::to_string(j) + " is numerically dependent", j, j);
            rfac(j, j) = nrm;
            const double inv = 1.0 / nrm;
            for (std::size_t k = 0; k < n; ++k) q(k, j) *= inv;
        }
    };

    Matrix q1, r1, q2, r2;
    mgs_pass(u, q1, r1);
    mgs_pass(q1, q2, r2);
    return Reorth{std::move(q2), matmul(r2, r1)};
}

LUFactors lu_factor(Matrix a) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw DimensionError("lu_factor: matrix not square");
    const double scale = a.max_abs();
    LUFactors f;
    f.perm.resize(n);
    std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
    for (std::size_t t = 0; t < n; ++t) {
        std::size_t imax = t;
        double best = std::abs(a(t, t));
        for (std::size_t i = t + 1; i < n; ++i)
            if (std::abs(a(i, t)) > best) {
                best = std::abs(a(i, t));
                imax = i;
            }
        if (best <= n * 2.2e-16 * scale || best == 0.0)
            throw SingularMatrixError("lu_factor: singular to working precision at step " + std::to_string(t));
        if (imax != t) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(t, j), a(imax, j));
            std::swap(f.perm[t], f.perm[imax]);
        }
        const double inv = 1.0 / a(t, t);
        for (std::size_t i = t + 1; i < n; ++i) {
            a(i, t) *= inv;
            const double lit = a(i, t);
            for (std::size_t j = t + 1; j < n; ++j) a(i, j) -= lit * a(t, j);
        }
    }
    f.lu = std::move(a);
    return f;
}

Matrix lu_solve(const LUFactors& f, const Matrix& b) {
    const std::size_t n = f.lu.rows();
    if (b.rows() != n) throw DimensionError("lu_solve: rhs rows mismatch");
    Matrix x(n, b.cols());
    for (std::size_t c = 0; c < b.cols(); ++c) {
        for (std::size_t i = 0; i < n; ++i) x(i, c) = b(f.perm[i], c);
        for (std::size_t i = 1; i < n; ++i) {
            double acc = x(i, c);
            for (std::size_t j = 0; j < i; ++j) acc -= f.lu(i, j) * x(j, c);
            x(i, c) = acc;
        }
        for (std::size_t i = n; i-- > 0;) {
            double acc = x(i, c);
            for (std::size_t j = i + 1; j < n; ++j) acc -= f.lu(i, j) * x(j, c);
            x(i, c) = acc / f.lu(i, i);
        }
    }
    return x;
}

Matrix lu_solve_transposed(const LUFactors& f, const Matrix& b) {
    const std::size_t n = f.lu.rows();
    if (b.rows() != n) throw DimensionError("lu_solve_transposed: rhs rows mismatch");
    Matrix x(n, b.cols());
    for (std::size_t c = 0; c < b.cols(); ++c) {
        // U^T y = b (forward), L^T z = y (backward), then undo the row permutation
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = b(i, c);
            for (std::size_t j = 0; j < i; ++j) acc -= f.lu(j, i) * y[j];
            y[i] = acc / f.lu(i, i);
        }
        for (std::size_t i = n; i-- > 0;) {
            double acc = y[i];
            for (std::size_t j = i + 1; j < n; ++j) acc -= f.lu(j, i) * y[j];
            y[i] = acc;
        }
        for (std::size_t i = 0; i < n; ++i) x(f.perm[i], c) = y[i];
    }
    return x;
}

std::vector<double> singular_values(const Matrix& a) {
    Matrix b = (a.rows() >= a.cols()) ? a : transpose(a);
    const std::size_t n = b.rows(), k = b.cols();
    bool rotated = true;
    for (int sweep = 0; sweep < 60 && rotated; ++sweep) {
        rotated = false;
        for (std::size_t i = 0; i + 1 < k; ++i) {
            for (std::size_t j = i + 1; j < k; ++j) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t t = 0; t < n; ++t) {
                    alpha += b(t, i) * b(t, i);
                    beta += b(t, j) * b(t, j);
                    gamma += b(t, i) * b(t, j);
                }
                if (gamma == 0.0 || alpha == 0.0 || beta == 0.0) continue;
                if (std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0) ? 1.0 / (zeta + std::sqrt(1.0 + zeta * zeta))
                                               : -1.0 / (-zeta + std::sqrt(1.0 + zeta * zeta));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;
                for (std::size_t row = 0; row < n; ++row) {
                    const double bi = b(row, i), bj = b(row, j);
                    b(row, i) = cs * bi - sn * bj;
                    b(row, j) = sn * bi + cs * bj;
                }
            }
        }
    }
    std::vector<double> sv(k);
    for (std::size_t j = 0; j < k; ++j) {
        double acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) acc += b(t, j) * b(t, j);
        sv[j] = std::sqrt(acc);
    }
    std::sort(sv.begin(), sv.end(), std::greater<double>());
    return sv;
}

double spectral_norm(const Matrix& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    const bool tall = a.rows() >= a.cols();
    const std::size_t k = tall ? a.cols() : a.rows();
    Matrix gram(k, k);
    if (tall) {
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t i = 0; i <= j; ++i) {
                double acc = 0.0;
                for (std::size_t t = 0; t < a.rows(); ++t) acc += a(t, i) * a(t, j);
                gram(i, j) = acc;
                gram(j, i) = acc;
            }
    } else {
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t i = 0; i <= j; ++i) {
                double acc = 0.0;
                for (std::size_t t = 0; t < a.cols(); ++t) acc += a(i, t) * a(j, t);
                gram(i, j) = acc;
                gram(j, i) = acc;
            }
    }
    const EigResult e = sym_eig(gram);
    return std::sqrt(std::max(e.values.front(), 0.0));
}

EigResult sym_eig_leading(const Matrix& c, std::size_t count, std::uint64_t seed) {
    const std::size_t n = c.rows();
    if (c.cols() != n) throw DimensionError("sym_eig_leading: matrix not square");
    if (count == 0 || count > n) throw DimensionError("sym_eig_leading: bad count");
    const std::size_t block = std::min(n, count + 8);

    std::vector<double> unit(n, 1.0);
    Philox gen(seed);
    Matrix x(n, block);
    for (std::size_t j = 0; j < block; ++j)
        for (std::size_t i = 0; i < n; ++i) x(i, j) = gen.normal(rng_stream::subspace_start, j * n + i);
    x = reorthonormalize(x, unit).q;

    std::vector<double> prev(count, 0.0);
    for (int iter = 0; iter < 200; ++iter) {
        x = reorthonormalize(matmul(c, x), unit).q;
        if (iter % 5 == 4 || iter == 199) {
            const Matrix h = weighted_inner(x, matmul(c, x), unit);
            EigResult ritz = sym_eig(h);
            double delta = 0.0, scale = std::max(1e-300, std::abs(ritz.values[0]));
            for (std::size_t i = 0; i < count; ++i) delta = std::max(delta, std::abs(ritz.values[i] - prev[i]));
            for (std::size_t i = 0; i < count; ++i) prev[i] = ritz.values[i];
            if (delta <= 1e-14 * scale) break;
        }
    }

    const Matrix h = weighted_inner(x, matmul(c, x), unit);
    EigResult ritz = sym_eig(h);
    EigResult out;
    out.values.assign(ritz.values.begin(), ritz.values.begin() + count);
    Matrix w(block, count);
    for (std::size_t j = 0; j < count; ++j)
        for (std::size_t i = 0; i < block; ++i) w(i, j) = ritz.vectors(i, j);
    out.vectors = matmul(x, w);
    for (std::size_t j = 0; j < count; ++j) sign_normalize_column(out.vectors, j);
    return out;
}

}  // namespace linalg
}  // namespace tdb
