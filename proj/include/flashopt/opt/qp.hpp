#pragma once

// Dense strictly convex QP
//
//   minimize 1/2 x'Gx + a'x   subject to   C x >= b
//
// by the dual active-set method of Goldfarb and Idnani. Sizes here are tiny
// (a handful of variables and rows), so the factorization of the active set is
// rebuilt from scratch after every change rather than updated.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/QR>

namespace flashopt::opt {

enum class QpStatus { optimal, infeasible, failed };

template <typename Scalar>
struct QpResult {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  QpStatus status = QpStatus::failed;
  Vec x;
  Vec multipliers;  // one per row of C, zero for inactive rows
  std::vector<int> active;
  int iterations = 0;
};

template <typename Scalar>
QpResult<Scalar> solve_qp(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& G,
                          const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& a,
                          const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& C,
                          const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b,
                          int max_iterations = 0) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = G.rows();
  const Eigen::Index rows = C.rows();
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  if (max_iterations <= 0) max_iterations = static_cast<int>(50 * (n + rows) + 100);

  QpResult<Scalar> res;
  res.multipliers = Vec::Zero(rows);

  Eigen::LLT<Mat> llt(G);
  if (llt.info() != Eigen::Success) return res;
  const Mat L = llt.matrixL();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(L(i, i) > 0)) return res;
  }

  Vec x = -llt.solve(a);
  std::vector<int> active;
  Vec u(0);
  Mat J, R;

  auto rebuild = [&]() {
    const Eigen::Index q = static_cast<Eigen::Index>(active.size());
    const Mat identity = Mat::Identity(n, n);
    if (q == 0) {
      J = L.transpose().template triangularView<Eigen::Upper>().solve(identity);
      R.resize(0, 0);
      return;
    }
    Mat N(n, q);
    for (Eigen::Index j = 0; j < q; ++j) N.col(j) = C.row(active[j]).transpose();
    const Mat M = L.template triangularView<Eigen::Lower>().solve(N);
    Eigen::HouseholderQR<Mat> qr(M);
    const Mat Q = qr.householderQ() * identity;
    R = qr.matrixQR().topLeftCorner(q, q).template triangularView<Eigen::Upper>();
    J = L.transpose().template triangularView<Eigen::Upper>().solve(Q);
  };
  rebuild();

  auto slack = [&](Eigen::Index j) { return C.row(j).dot(x) - b[j]; };
  auto row_tol = [&](Eigen::Index j) {
    return Scalar(1e3) * eps * (Scalar(1) + std::abs(b[j]) + C.row(j).norm() * x.norm());
  };

  int iter = 0;
  while (true) {
    // Most violated inactive constraint.
    Eigen::Index p = -1;
    Scalar worst = 0;
    for (Eigen::Index j = 0; j < rows; ++j) {
      if (std::find(active.begin(), active.end(), static_cast<int>(j)) != active.end()) continue;
      const Scalar norm = std::max(C.row(j).norm(), eps);
      const Scalar s = slack(j);
      if (s < -row_tol(j) && s / norm < worst) {
        worst = s / norm;
        p = j;
      }
    }
    if (p < 0) {
      res.status = QpStatus::optimal;
      break;
    }
    const Vec np = C.row(p).transpose();
    Vec uplus(u.size() + 1);
    uplus << u, Scalar(0);

    bool added = false;
    while (!added) {
      if (++iter > max_iterations) {
        res.iterations = iter;
        res.x = x;
        return res;
      }
      const Eigen::Index q = static_cast<Eigen::Index>(active.size());
      const Vec d = J.transpose() * np;
      const Vec z = J.rightCols(n - q) * d.tail(n - q);
      Vec r(q);
      if (q > 0) r = R.template triangularView<Eigen::Upper>().solve(d.head(q));

      Scalar t1 = inf;
      Eigen::Index k = -1;
      for (Eigen::Index j = 0; j < q; ++j) {
        if (r[j] > eps * (Scalar(1) + r.cwiseAbs().maxCoeff())) {
          const Scalar ratio = uplus[j] / r[j];
          if (ratio < t1) {
            t1 = ratio;
            k = j;
          }
        }
      }
      Scalar t2 = inf;
      const Scalar zn = z.dot(np);
      if (z.norm() > Scalar(1e3) * eps * (Scalar(1) + d.norm()) && zn > 0) {
        t2 = -slack(p) / zn;
      }
      const Scalar t = std::min(t1, t2);
      if (t == inf) {
        res.status = QpStatus::infeasible;
        res.iterations = iter;
        res.x = x;
        return res;
      }
      if (q > 0) uplus.head(q) -= t * r;
      uplus[q] += t;
      if (t2 < inf) x += t * z;

      if (t2 <= t1) {
        active.push_back(static_cast<int>(p));
        u = uplus;
        rebuild();
        added = true;
      } else {
        active.erase(active.begin() + k);
        Vec shrunk(uplus.size() - 1);
        for (Eigen::Index j = 0, o = 0; j < uplus.size(); ++j) {
          if (j != k) shrunk[o++] = uplus[j];
        }
        uplus = shrunk;
        u = uplus.head(uplus.size() - 1);
        rebuild();
        // Dropping may leave p satisfied already.
        if (slack(p) >= -row_tol(p)) break;
      }
    }
  }

  res.x = x;
  res.iterations = iter;
  res.active = active;
  for (std::size_t j = 0; j < active.size(); ++j) {
    res.multipliers[active[j]] = std::max(Scalar(0), u[static_cast<Eigen::Index>(j)]);
  }
  return res;
}

}  // namespace flashopt::opt
