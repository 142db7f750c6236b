#include "enlarge/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "enlarge/rng.hpp"
#include "enlarge/stats_util.hpp"

namespace enlarge {

namespace {

double weighted_rms(const Vector& r, const Vector& w) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i < r.size(); ++i) {
    num += w[i] * r[i] * r[i];
    den += w[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

double mad_residuals(const Vector& r) {
  std::vector<double> rv(r.data(), r.data() + r.size());
  return mad_of(rv);
}

RegParams from_coef(const Vector& coef, int d) {
  RegParams out;
  out.beta = coef.head(d);
  out.intercept = coef[d];
  return out;
}

double coef_change(const Vector& a, const Vector& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

RegParams fit_l2(const RegData& data, const Matrix& design) {
  Vector w = Vector::Ones(data.n());
  Vector coef = solve_wls(design, data.y, w);
  RegParams out = from_coef(coef, data.dim());
  out.sigma = weighted_rms(residuals(out, data), w);
  return out;
}

RegParams fit_l1(const RegData& data, const Matrix& design,
                 const FitOptions& opts) {
  Vector coef = solve_wls(design, data.y, Vector::Ones(data.n()));
  RegParams cur = from_coef(coef, data.dim());
  Vector r = residuals(cur, data);
  const double eps = 1e-8 * (mad_residuals(r) + 1e-12);
  auto objective = [&](const Vector& res) {
    double s = 0.0;
    for (int i = 0; i < res.size(); ++i) s += std::sqrt(res[i] * res[i] + eps * eps);
    return s;
  };
  double obj = objective(r);
  Vector w(data.n());
  for (int it = 0; it < opts.max_iter; ++it) {
    for (int i = 0; i < data.n(); ++i) w[i] = 1.0 / std::sqrt(r[i] * r[i] + eps * eps);
    Vector coef_new = solve_wls(design, data.y, w);
    RegParams prop = from_coef(coef_new, data.dim());
    Vector r_new = residuals(prop, data);
    const double obj_new = objective(r_new);
    if (obj_new > obj + 1e-10 * (1.0 + std::abs(obj))) break;
    const double change = coef_change(coef_new, coef);
    coef = coef_new;
    cur = prop;
    r = r_new;
    obj = obj_new;
    if (change < opts.tol) break;
  }
  cur.sigma = weighted_rms(r, w.size() == data.n() ? w : Vector::Ones(data.n()));
  return cur;
}

RegParams fit_huber(const RegData& data, const Matrix& design, double k,
                    const FitOptions& opts) {
  if (!(k > 0.0)) throw ConfigError("huber_k must be positive");
  Vector coef = solve_wls(design, data.y, Vector::Ones(data.n()));
  RegParams cur = from_coef(coef, data.dim());
  Vector r = residuals(cur, data);
  Vector w = Vector::Ones(data.n());
  auto objective = [&](const Vector& res, double s) {
    double acc = 0.0;
    for (int i = 0; i < res.size(); ++i) {
      const double a = std::abs(res[i]);
      acc += a <= k * s ? 0.5 * a * a : k * s * (a - 0.5 * k * s);
    }
    return acc;
  };
  for (int it = 0; it < opts.max_iter; ++it) {
    double scale = 1.4826 * mad_residuals(r);
    if (!(scale > 0.0)) break;
    const double obj = objective(r, scale);
    for (int i = 0; i < data.n(); ++i) {
      const double a = std::abs(r[i]);
      w[i] = a <= k * scale ? 1.0 : k * scale / a;
    }
    Vector coef_new = solve_wls(design, data.y, w);
    RegParams prop = from_coef(coef_new, data.dim());
    Vector r_new = residuals(prop, data);
    if (objective(r_new, scale) > obj + 1e-10 * (1.0 + std::abs(obj))) break;
    const double change = coef_change(coef_new, coef);
    coef = coef_new;
    cur = prop;
    r = r_new;
    if (change < opts.tol) break;
  }
  cur.sigma = weighted_rms(r, w);
  return cur;
}

double trimmed_ss(const Vector& r, int h, std::vector<int>* keep = nullptr) {
  const int n = static_cast<int>(r.size());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::nth_element(idx.begin(), idx.begin() + h - 1, idx.end(),
                   [&](int a, int b) { return r[a] * r[a] < r[b] * r[b]; });
  double ss = 0.0;
  for (int i = 0; i < h; ++i) ss += r[idx[i]] * r[idx[i]];
  if (keep) keep->assign(idx.begin(), idx.begin() + h);
  return ss;
}

Vector subset_ls(const RegData& data, const Matrix& design,
                 const std::vector<int>& rows) {
  Matrix z(rows.size(), design.cols());
  Vector y(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    z.row(i) = design.row(rows[i]);
    y[i] = data.y[rows[i]];
  }
  return solve_wls(z, y, Vector::Ones(static_cast<int>(rows.size())));
}

/// One concentration step: refit on the h smallest squared residuals.
/// The trimmed sum of squares never increases.
Vector c_step(const RegData& data, const Matrix& design, const Vector& coef,
              int h) {
  RegParams p = from_coef(coef, data.dim());
  Vector r = residuals(p, data);
  std::vector<int> keep;
  trimmed_ss(r, h, &keep);
  return subset_ls(data, design, keep);
}

RegParams fit_lts(const RegData& data, const Matrix& design, double trim,
                  const FitOptions& opts) {
  if (trim < 0.0 || trim > 0.5) throw ConfigError("trim_ratio must be in [0, 0.5]");
  const int n = data.n();
  const int p = data.dim() + 1;
  const int h = static_cast<int>(std::ceil(n * (1.0 - trim)));
  if (h < p + 1) throw InvalidTrimError("LTS retains fewer than d + 2 points");

  Rng rng(split_seed(opts.seed, label_hash("lts")));
  const int n_subsets = 500;
  const int short_steps = 10;
  struct Candidate {
    Vector coef;
    double ss;
  };
  std::vector<Candidate> cands;
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int s = 0; s < n_subsets; ++s) {
    std::vector<int> rows;
    while (static_cast<int>(rows.size()) < p) {
      int i = pick(rng);
      if (std::find(rows.begin(), rows.end(), i) == rows.end()) rows.push_back(i);
    }
    Vector coef;
    try {
      coef = subset_ls(data, design, rows);
    } catch (const DesignSingularError&) {
      continue;  // degenerate p-subset, draw another
    }
    for (int k = 0; k < short_steps; ++k) coef = c_step(data, design, coef, h);
    RegParams par = from_coef(coef, data.dim());
    cands.push_back({coef, trimmed_ss(residuals(par, data), h)});
  }
  if (cands.empty()) throw DesignSingularError("all LTS subsets were singular");
  std::sort(cands.begin(), cands.end(),
            [](const Candidate& a, const Candidate& b) { return a.ss < b.ss; });
  cands.resize(std::min<size_t>(10, cands.size()));

  Vector best_coef = cands[0].coef;
  double best_ss = cands[0].ss;
  for (auto& cand : cands) {
    Vector coef = cand.coef;
    double ss = cand.ss;
    for (int k = 0; k < 200; ++k) {
      Vector coef_new = c_step(data, design, coef, h);
      RegParams par = from_coef(coef_new, data.dim());
      const double ss_new = trimmed_ss(residuals(par, data), h);
      if (ss - ss_new < 1e-12 * (1.0 + ss)) {
        coef = coef_new;
        ss = ss_new;
        break;
      }
      coef = coef_new;
      ss = ss_new;
    }
    if (ss < best_ss) {
      best_ss = ss;
      best_coef = coef;
    }
  }
  RegParams out = from_coef(best_coef, data.dim());
  out.sigma = std::sqrt(best_ss / h);
  return out;
}

RegParams fit_gemmc(const RegData& data, const Matrix& design,
                    const FitOptions& opts) {
  RegParams init = fit_l1(data, design, opts);
  Vector r0 = residuals(init, data);
  double sigma = 1.4826 * mad_residuals(r0);
  if (!(sigma > 0.0)) sigma = 1e-8 * (mad_residuals(data.y) + 1e-12) + 1e-12;
  auto objective = [&](const Vector& r) {
    double acc = 0.0;
    for (int i = 0; i < r.size(); ++i) {
      const double q = r[i] * r[i];
      acc += 0.5 * q / (1.0 + q / (sigma * sigma));
    }
    return acc;
  };

  RegParams best;
  double best_obj = std::numeric_limits<double>::infinity();
  Vector best_w;
  for (int s = 0; s < opts.n_starts; ++s) {
    Vector coef(data.dim() + 1);
    coef.head(data.dim()) = init.beta;
    coef[data.dim()] = init.intercept;
    if (s > 0) {
      Rng rng(split_seed(opts.seed, static_cast<std::uint64_t>(s), label_hash("gemmc")));
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (int j = 0; j < coef.size(); ++j) coef[j] += 2.0 * sigma * gauss(rng);
    }
    RegParams cur = from_coef(coef, data.dim());
    Vector r = residuals(cur, data);
    double obj = objective(r);
    Vector w(data.n());
    for (int it = 0; it < opts.max_iter; ++it) {
      for (int i = 0; i < data.n(); ++i) {
        const double u = 1.0 + r[i] * r[i] / (sigma * sigma);
        w[i] = 1.0 / (u * u);
      }
      Vector coef_new = solve_wls(design, data.y, w);
      RegParams prop = from_coef(coef_new, data.dim());
      Vector r_new = residuals(prop, data);
      const double obj_new = objective(r_new);
      if (obj_new > obj + 1e-10 * (1.0 + std::abs(obj))) break;
      const double change = coef_change(coef_new, coef);
      coef = coef_new;
      cur = prop;
      r = r_new;
      obj = obj_new;
      if (change < opts.tol) break;
    }
    if (obj < best_obj) {
      best_obj = obj;
      best = cur;
      best_w = w;
    }
  }
  best.sigma = weighted_rms(residuals(best, data), best_w);
  return best;
}

}  // namespace

RegParams fit_baseline(const RegData& data, const BaselineKind& spec,
                       const FitOptions& opts) {
  validate_reg_data(data);
  const Matrix design = with_intercept(data.x);
  switch (spec.kind) {
    case BaselineMethod::L2:
      return fit_l2(data, design);
    case BaselineMethod::L1:
      return fit_l1(data, design, opts);
    case BaselineMethod::Huber:
      return fit_huber(data, design, spec.huber_k, opts);
    case BaselineMethod::LTS:
      return fit_lts(data, design, spec.trim_ratio, opts);
    case BaselineMethod::GemMc:
      return fit_gemmc(data, design, opts);
  }
  throw ConfigError("unknown baseline method");
}

double rmse(const RegParams& params, const RegData& test) {
  if (test.n() < 1) throw DataError("empty test set");
  if (params.beta.size() != test.dim()) throw DataError("dimension mismatch");
  Vector r = test.y - predict(params, test.x);
  return std::sqrt(r.squaredNorm() / test.n());
}

}  // namespace enlarge
