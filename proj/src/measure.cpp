#include "slm/measure.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace slm {

MeasureTag MeasureTag::foellmer(std::size_t j) {
  if (j == 0) throw std::invalid_argument("Foellmer measure index is 1-based");
  return MeasureTag(j);
}

MeasureTag MeasureTag::parse(const std::string& text) {
  if (text == "P") return original();
  std::string digits;
  if (text.rfind("Pj:", 0) == 0)
    digits = text.substr(3);
  else if (text.size() > 1 && text[0] == 'P')
    digits = text.substr(1);
  if (digits.empty() || digits.size() > 6 ||
      !std::all_of(digits.begin(), digits.end(),
                   [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    throw std::invalid_argument("measure must be 'P' or 'Pj:<j>', got '" + text + "'");
  return foellmer(std::stoul(digits));
}

std::string MeasureTag::label() const {
  return is_original() ? std::string("P") : "P" + std::to_string(j_);
}

void girsanov_drift(const SdeSystem& system, std::size_t j, std::span<const double> x,
                    std::span<const double> sigma, double sigma_bar, BetaForm form,
                    std::span<double> out) noexcept {
  const std::size_t d = system.d();
  const std::size_t jj = j - 1;
  const auto& corr = system.correlation();
  const double sj = sigma[jj];
  for (std::size_t i = 0; i < d; ++i) {
    const double m = form == BetaForm::OwnComponent ? x[i] : x[jj];
    out[i] = corr(i, jj) * sigma[i] * sj * m;
  }
  out[d] = corr(jj, d) * sj * sigma_bar;
}

std::vector<double> girsanov_drift(const SdeSystem& system, std::size_t j,
                                   std::span<const double> x, double t, BetaForm form) {
  if (j == 0 || j > system.d())
    throw std::invalid_argument("component index j must lie in 1..d");
  const Coefficients c = evaluate_coefficients(system, x, t);
  std::vector<double> out(system.state_size());
  girsanov_drift(system, j, x, c.sigma, c.sigma_bar, form, out);
  return out;
}

EffectiveSystem::EffectiveSystem(SdeSystem system, MeasureTag measure, BetaForm form)
    : system_(std::move(system)),
      measure_(measure),
      form_(form),
      extra_(system_.state_size()),
      has_extra_(system_.state_size(), false) {
  if (!measure_.is_original() && measure_.component() > system_.d())
    throw std::invalid_argument("measure " + measure_.label() + " refers to a component beyond d = " +
                                std::to_string(system_.d()));
  driftless_ = measure_.is_original() && system_.b().is_zero();
}

EffectiveSystem EffectiveSystem::with_extra_drift(std::size_t slot, Expression drift) const {
  if (slot >= state_size()) throw std::invalid_argument("drift slot out of range");
  if (drift.dimension() != state_size())
    throw std::invalid_argument("extra drift must be parsed with dimension d+1");
  EffectiveSystem out = *this;
  out.extra_[slot] = std::move(drift);
  out.has_extra_[slot] = !out.extra_[slot].is_zero();
  out.driftless_ = driftless_ && !out.has_extra_[slot];
  return out;
}

bool EffectiveSystem::uses_norm() const noexcept {
  const auto& s = system_;
  const auto reads = [](const Expression& e) { return e.uses_norm(); };
  return std::any_of(s.sigma_diag().begin(), s.sigma_diag().end(), reads) ||
         s.sigma_bar().uses_norm() || s.b().uses_norm() ||
         std::any_of(extra_.begin(), extra_.end(), reads);
}

void EffectiveSystem::drift_from(const EvalPoint& p, std::span<const double> sigma,
                                 double sigma_bar, double b, std::span<double> out,
                                 bool& domain_error) const noexcept {
  const std::size_t d = system_.d();
  if (measure_.is_original()) {
    for (std::size_t i = 0; i < d; ++i) out[i] = 0.0;
    out[d] = 0.0;
  } else {
    girsanov_drift(system_, measure_.component(), std::span<const double>(p.x, p.size), sigma,
                   sigma_bar, form_, out);
  }
  out[d] += b;
  for (std::size_t i = 0; i <= d; ++i)
    if (has_extra_[i]) out[i] += extra_[i].evaluate_fast(p, domain_error);
}

std::vector<double> EffectiveSystem::drift(std::span<const double> x, double t) const {
  const Coefficients c = evaluate_coefficients(system_, x, t);
  std::vector<double> out(state_size());
  for (std::size_t i = 0; i < state_size(); ++i)
    if (has_extra_[i]) extra_[i].evaluate(x, t);  // throws with a message on domain errors
  const EvalPoint p{x.data(), x.size(), euclidean_norm(x), t};
  bool err = false;
  drift_from(p, c.sigma, c.sigma_bar, c.b, out, err);
  return out;
}

EffectiveSystem effective_sde(const SdeSystem& system, MeasureTag measure, BetaForm form) {
  return EffectiveSystem(system, measure, form);
}

}  // namespace slm
