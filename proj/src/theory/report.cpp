// Copyright 2026 The heavytail Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "theory/report.hpp"

#include <Eigen/LU>
#include <cmath>

#include "core/error.hpp"
#include "core/format.hpp"
#include "theory/complexity.hpp"

namespace heavytail::theory {

void TheoryReport::add(std::string key, std::optional<double> value,
                       std::string note) {
  entries_.push_back({std::move(key), value, std::move(note)});
}

const ReportEntry* TheoryReport::find(const std::string& key) const {
  for (const auto& e : entries_) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

std::optional<double> TheoryReport::get(const std::string& key) const {
  const ReportEntry* e = find(key);
  return e ? e->value : std::nullopt;
}

std::string TheoryReport::csv_header() const {
  std::string out;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (i) out += ',';
    out += entries_[i].key;
  }
  return out;
}

std::string TheoryReport::csv_row() const {
  std::string out;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (i) out += ',';
    out += entries_[i].value ? format_double(*entries_[i].value) : "NA";
  }
  return out;
}

namespace {

// Runs `f`; an Error becomes an absent value carrying its message.
template <class F>
void add_guarded(TheoryReport& r, const char* key, F&& f) {
  try {
    r.add(key, f());
  } catch (const Error& e) {
    r.add(key, std::nullopt, e.what());
  }
}

const char* provenance_name(Provenance p) {
  return p == Provenance::kExact ? "exact" : "upper-bound";
}

}  // namespace

TheoryReport build_report(const Target& target, const ReportRequest& req) {
  TheoryReport r;
  const int d = target.dim();
  const double beta = target.beta();
  const double alpha = target.alpha();
  const double lip = target.lipschitz();
  const double cv = target.cv();
  const bool iso = target.family() == Family::kIsotropicStudent;

  r.add("d", d);
  r.add("beta", beta);
  r.add("alpha", alpha);
  r.add("lipschitz", lip);
  r.add("cv", cv);
  r.add("eps", req.eps);
  r.add("m", req.m);

  // Moments.
  std::optional<Moments> mom = req.moments;
  std::string mom_note;
  if (!mom && target.is_student()) {
    try {
      std::optional<double> tr;
      if (!iso) tr = target.sigma().trace();
      mom = analytic_moments_student(d, beta, tr);
    } catch (const Error& e) {
      mom_note = e.what();
    }
  } else if (!mom) {
    mom_note = "moments must be supplied for custom potentials";
  }
  if (mom) {
    r.add("ev", mom->ev, provenance_name(mom->ev_provenance));
    r.add("egrad2", mom->egrad2, provenance_name(mom->egrad2_provenance));
    r.add("egrad2_is_upper_bound",
          mom->egrad2_provenance == Provenance::kUpperBound ? 1.0 : 0.0);
  } else {
    r.add("ev", std::nullopt, mom_note);
    r.add("egrad2", std::nullopt, mom_note);
    r.add("egrad2_is_upper_bound", std::nullopt, mom_note);
  }

  // W2(nu0, pi) surrogate from a point mass at the origin.
  std::optional<double> w2 = req.w2_init;
  if (!w2 && target.is_student()) {
    try {
      const double tr_inv =
          iso ? static_cast<double>(d) : target.sigma().inverse().trace();
      w2 = w2_init_default(0.0, student_second_moment(d, beta, tr_inv));
    } catch (const Error&) {
    }
  }
  r.add("w2_init", w2, req.w2_init ? "supplied" : "surrogate");

  std::optional<double> dl;
  try {
    dl = delta(beta, d, cv);
    r.add("delta", dl);
  } catch (const Error& e) {
    r.add("delta", std::nullopt, e.what());
  }

  const char* no_delta = "contraction margin delta <= 0";
  const char* no_mom = "moments unavailable";
  std::optional<double> hmax;
  if (dl) {
    hmax = first_order_step_bound(alpha, lip, beta, *dl);
    r.add("h_max_first", hmax);
    add_guarded(r, "h_max_zeroth", [&] {
      return zeroth_order_step_bound(alpha, lip, beta, *dl, d, req.m);
    });
  } else {
    r.add("h_max_first", std::nullopt, no_delta);
    r.add("h_max_zeroth", std::nullopt, no_delta);
  }

  const char* abc_keys[] = {"h", "A", "B", "C", "w2_bias"};
  if (dl && mom) {
    const double h = req.h.value_or(*hmax / 2.0);
    try {
      const ContractionParams p = contraction_params(h, alpha, lip, beta, *dl,
                                                     d, mom->ev, mom->egrad2);
      r.add("h", h);
      r.add("A", p.A);
      r.add("B", p.B);
      r.add("C", p.C);
      r.add("w2_bias", w2_bias(p));
    } catch (const Error& e) {
      for (const char* k : abc_keys) r.add(k, std::nullopt, e.what());
    }
  } else {
    for (const char* k : abc_keys) r.add(k, std::nullopt, dl ? no_mom : no_delta);
  }

  const Problem prob{d, beta, alpha, lip, cv, mom ? mom->ev : 0.0,
                     mom ? mom->egrad2 : 0.0};
  const char* k_keys[] = {"h_star", "log_factor", "K", "K_bound_273"};
  if (dl && mom && w2) {
    const IterationComplexity ic = iteration_complexity(req.eps, *w2, prob);
    r.add("h_star", ic.h_star);
    r.add("log_factor", ic.log_factor);
    r.add("K", static_cast<double>(ic.K));
    r.add("K_bound_273", ic.log_factor > 0.0
                             ? std::optional<double>(ic.K_bound_273)
                             : std::nullopt,
          "already within eps");
  } else {
    for (const char* k : k_keys) {
      r.add(k, std::nullopt, !dl ? no_delta : !mom ? no_mom : "w2_init unknown");
    }
  }

  const char* zo_keys[] = {"zo_sigma", "zo_h_star", "A_zo", "B_zo", "C_zo",
                           "zo_K", "zo_evaluations", "zo_K_order"};
  if (dl && mom && w2) {
    try {
      const ZeroOrderComplexity zc =
          zeroth_order_complexity(req.eps, *w2, req.m, prob);
      r.add("zo_sigma", zc.sigma);
      r.add("zo_h_star", zc.h_star);
      r.add("A_zo", zc.params.A);
      r.add("B_zo", zc.params.B);
      r.add("C_zo", zc.params.C);
      r.add("zo_K", static_cast<double>(zc.K));
      r.add("zo_evaluations", zc.evaluations);
      r.add("zo_K_order", zeroth_order_order(req.eps, req.m, prob));
    } catch (const Error& e) {
      for (const char* k : zo_keys) r.add(k, std::nullopt, e.what());
    }
  } else {
    for (const char* k : zo_keys) {
      r.add(k, std::nullopt, !dl ? no_delta : !mom ? no_mom : "w2_init unknown");
    }
  }
  if (dl) {
    r.add("sigma_recommended", recommended_sigma(req.eps, *dl, d));
  } else {
    r.add("sigma_recommended", std::nullopt, no_delta);
  }

  // Weighted Poincare constants and chi-square rates.
  add_guarded(r, "wpi_strongly_convex",
              [&] { return wpi_constant_strongly_convex(alpha, beta, cv); });
  add_guarded(r, "chi2_rate_strongly_convex",
              [&] { return chi2_rate_strongly_convex(alpha, beta, cv); });
  r.add("chi2_rate_needs_beta_gt_d", beta > d ? 1.0 : 0.0,
        "1 when beta > d holds");

  const double gamma = beta / (d + 2.0);
  if (iso) {
    add_guarded(r, "cv_gamma", [&] { return student_cv_gamma(beta, d); });
    add_guarded(r, "wpi_small_beta", [&] {
      return wpi_constant_small_beta(beta, gamma, student_cv_gamma(beta, d), d);
    });
    add_guarded(r, "chi2_rate_small_beta", [&] {
      return chi2_rate_small_beta(beta, gamma, student_cv_gamma(beta, d), d);
    });
    add_guarded(r, "wpi_student_printed", [&] {
      return student_wpi_constant_printed(target.dof(), d);
    });
  } else {
    const char* why = "t-law closed forms cover the isotropic family only";
    r.add("cv_gamma", std::nullopt, why);
    r.add("wpi_small_beta", std::nullopt, why);
    r.add("chi2_rate_small_beta", std::nullopt, why);
    r.add("wpi_student_printed", std::nullopt, why);
  }

  const SmallBetaBridge br = bridge_small_beta(alpha, lip, beta, d, cv);
  const char* why_bridge = "needs beta > L^2 d / (2 alpha^2) + 1";
  r.add("bridge_gamma", br.gamma, br.gamma ? "" : why_bridge);
  r.add("bridge_cv_gamma", br.cv_gamma, br.cv_gamma ? "" : why_bridge);
  r.add("strongly_convex_implies_small_beta",
        br.strongly_convex_implies_small_beta ? 1.0 : 0.0);

  if (iso) {
    add_guarded(r, "dissipativity",
                [&] { return dissipativity_constant_student(beta, d); });
  } else {
    r.add("dissipativity", std::nullopt, "isotropic family only");
  }
  return r;
}

}  // namespace heavytail::theory
