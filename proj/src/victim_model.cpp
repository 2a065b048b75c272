#include "phishsim/victim_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "phishsim/io.hpp"

namespace phishsim {

FeatureRow features(const TargetRecord& t) {
  if (t.followers_count < 0 || t.following_count < 0 || t.post_count < 0)
    throw InvalidArgument("features: negative count");
  if (!(t.age_days >= 0.0) || !std::isfinite(t.age_days))
    throw InvalidArgument("features: age_days must be a non-negative number");
  if (!(t.follower_rank >= 0.0 && t.follower_rank <= 1.0))
    throw InvalidArgument("features: follower_rank outside [0,1]");
  return {1.0,
          t.theme == Theme::politics ? 1.0 : 0.0,
          t.theme == Theme::entertainment ? 1.0 : 0.0,
          std::log1p(static_cast<double>(t.followers_count)),
          std::log1p(static_cast<double>(t.following_count)),
          std::log1p(static_cast<double>(t.post_count)),
          t.age_days * static_cast<double>(kSecondsPerDay) / kSecondsPerYear,
          t.follower_rank};
}

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

SusceptibilityParams SusceptibilityParams::defaults() {
  SusceptibilityParams p;
  p.beta[1] = 0.8;
  p.beta[6] = -0.3;
  return p;
}

namespace {

void check_probability(double v, const char* field) {
  if (!(v >= 0.0 && v <= 1.0))
    throw InvalidArgument(std::string("victim.") + field + ": must be in [0,1]");
}

}  // namespace

void SusceptibilityParams::validate() const {
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    if (!std::isfinite(beta[i]))
      throw InvalidArgument("victim.beta." + std::string(kFeatureNames[i]) + ": must be finite");
  check_probability(register_given_visit, "register_given_visit");
  check_probability(plain_access_given_visit, "plain_access_given_visit");
  check_probability(doc_click_given_visit, "doc_click_given_visit");
  check_probability(complaint_prob, "complaint_prob");
  if (!(mean_response_delay_s >= 0.0) || !std::isfinite(mean_response_delay_s))
    throw InvalidArgument("victim.mean_response_delay_s: must be a non-negative number");
}

nlohmann::json to_json(const SusceptibilityParams& p) {
  nlohmann::json beta = nlohmann::json::object();
  for (std::size_t i = 0; i < kFeatureCount; ++i) beta[std::string(kFeatureNames[i])] = p.beta[i];
  return {{"beta", beta},
          {"register_given_visit", p.register_given_visit},
          {"plain_access_given_visit", p.plain_access_given_visit},
          {"doc_click_given_visit", p.doc_click_given_visit},
          {"complaint_prob", p.complaint_prob},
          {"mean_response_delay_s", p.mean_response_delay_s}};
}

SusceptibilityParams params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("victim params: expected an object");
  SusceptibilityParams p;
  static const char* kKnown[] = {"beta",          "register_given_visit", "plain_access_given_visit",
                                 "doc_click_given_visit", "complaint_prob",
                                 "mean_response_delay_s"};
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : kKnown) known = known || key == k;
    if (!known) throw InvalidArgument("victim." + key + ": unknown field");
    (void)value;
  }
  auto number = [&](const char* key, double& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) throw InvalidArgument(std::string("victim.") + key + ": expected a number");
    dst = j[key].get<double>();
  };
  if (j.contains("beta")) {
    const auto& b = j["beta"];
    if (b.is_array()) {
      if (b.size() != kFeatureCount)
        throw InvalidArgument("victim.beta: expected " + std::to_string(kFeatureCount) + " values");
      for (std::size_t i = 0; i < kFeatureCount; ++i) {
        if (!b[i].is_number()) throw InvalidArgument("victim.beta: expected numbers");
        p.beta[i] = b[i].get<double>();
      }
    } else if (b.is_object()) {
      for (const auto& [key, value] : b.items()) {
        std::size_t idx = kFeatureCount;
        for (std::size_t i = 0; i < kFeatureCount; ++i)
          if (kFeatureNames[i] == key) idx = i;
        if (idx == kFeatureCount) throw InvalidArgument("victim.beta." + key + ": unknown feature");
        if (!value.is_number()) throw InvalidArgument("victim.beta." + key + ": expected a number");
        p.beta[idx] = value.get<double>();
      }
    } else {
      throw InvalidArgument("victim.beta: expected an object or array");
    }
  }
  number("register_given_visit", p.register_given_visit);
  number("plain_access_given_visit", p.plain_access_given_visit);
  number("doc_click_given_visit", p.doc_click_given_visit);
  number("complaint_prob", p.complaint_prob);
  number("mean_response_delay_s", p.mean_response_delay_s);
  p.validate();
  return p;
}

SusceptibilityParams load_params(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
  return params_from_json(j);
}

double visit_probability(const TargetRecord& target, const SusceptibilityParams& params) {
  const FeatureRow x = features(target);
  double z = 0.0;
  for (std::size_t i = 0; i < kFeatureCount; ++i) z += params.beta[i] * x[i];
  return logistic(z);
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::ignore: return "ignore";
    case Outcome::visit: return "visit";
    case Outcome::visit_register: return "visit_register";
    case Outcome::complain: return "complain";
  }
  return "?";
}

BehaviorOutcome decide_response(std::string_view pseudonym, double p_visit,
                                const SusceptibilityParams& params, std::uint64_t seed) {
  Rng rng = make_rng(derive_seed(seed, "victim"), pseudonym);
  // Fixed draw count so each decision uses the same stream positions.
  const double u_visit = uniform01(rng);
  const double u_register = uniform01(rng);
  const double u_plain = uniform01(rng);
  const double u_doc = uniform01(rng);
  const double u_complain = uniform01(rng);
  const double u_delay = uniform01(rng);

  BehaviorOutcome out;
  if (u_visit < p_visit) {
    out.kind = u_register < params.register_given_visit ? Outcome::visit_register : Outcome::visit;
    out.plain_access = out.kind == Outcome::visit && u_plain < params.plain_access_given_visit;
    out.doc_download = u_doc < params.doc_click_given_visit;
  } else if (u_complain < params.complaint_prob) {
    out.kind = Outcome::complain;
  }
  const double delay = -std::log1p(-u_delay) * params.mean_response_delay_s;
  out.delay = std::max<SimTime>(1, static_cast<SimTime>(std::llround(delay)));
  return out;
}

BehaviorOutcome decide_response(const TargetRecord& target, const SusceptibilityParams& params,
                                std::uint64_t seed) {
  return decide_response(target.pseudonym, visit_probability(target, params), params, seed);
}

}  // namespace phishsim
