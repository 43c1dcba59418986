#include "fbmsteer/model_json.hpp"

#include <fstream>

namespace fbmsteer {

namespace {

using nlohmann::json;

void require_keys(const json& j, std::initializer_list<const char*> allowed, const char* ctx) {
  if (!j.is_object()) throw std::invalid_argument(std::string(ctx) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok)
      throw std::invalid_argument(std::string(ctx) + ": unknown key '" + key + "'");
  }
}

const json& need(const json& j, const char* key, const char* ctx) {
  const auto it = j.find(key);
  if (it == j.end())
    throw std::invalid_argument(std::string(ctx) + ": missing key '" + key + "'");
  return *it;
}

json delay_to_json(const DelayFunction& d) {
  if (d.kind == DelayFunction::Kind::constant)
    return {{"kind", "constant"}, {"value", d.base}};
  return {{"kind", "sinusoidal"}, {"base", d.base}, {"amplitude", d.amplitude},
          {"frequency", d.frequency}};
}

DelayFunction delay_from_json(const json& j, const char* ctx) {
  const std::string kind = need(j, "kind", ctx).get<std::string>();
  if (kind == "constant") {
    require_keys(j, {"kind", "value"}, ctx);
    return DelayFunction{DelayFunction::Kind::constant, need(j, "value", ctx).get<double>(), 0.0,
                         1.0};
  }
  if (kind == "sinusoidal") {
    require_keys(j, {"kind", "base", "amplitude", "frequency"}, ctx);
    return DelayFunction{DelayFunction::Kind::sinusoidal, need(j, "base", ctx).get<double>(),
                         need(j, "amplitude", ctx).get<double>(),
                         need(j, "frequency", ctx).get<double>()};
  }
  throw std::invalid_argument(std::string(ctx) + ": unknown delay kind '" + kind + "'");
}

json shape_to_json(const PointwiseShape& s) {
  return {{"kind", s.kind == PointwiseShape::Kind::sine ? "sine" : "zero"}, {"gain", s.gain}};
}

PointwiseShape shape_from_json(const json& j, const char* ctx) {
  require_keys(j, {"kind", "gain"}, ctx);
  const std::string kind = need(j, "kind", ctx).get<std::string>();
  const double gain = need(j, "gain", ctx).get<double>();
  if (kind == "zero") return PointwiseShape{PointwiseShape::Kind::zero, gain};
  if (kind == "sine") return PointwiseShape{PointwiseShape::Kind::sine, gain};
  throw std::invalid_argument(std::string(ctx) + ": unknown shape kind '" + kind + "'");
}

}  // namespace

json spec_to_json(const DelaySystemSpec& s) {
  json j;
  j["modes"] = s.modes;
  j["horizon"] = s.horizon;
  j["hurst"] = s.hurst;
  j["max_delay"] = s.max_delay;
  j["delay_r"] = delay_to_json(s.delay_r);
  j["delay_rho"] = delay_to_json(s.delay_rho);
  j["f"] = shape_to_json(s.f_shape);
  j["g"] = shape_to_json(s.g_shape);
  j["sigma"] = {{"level", s.sigma.level},
                {"mode_decay", s.sigma.mode_decay},
                {"modulation", s.sigma.modulation},
                {"holder_gamma", s.sigma.holder_gamma}};
  j["history"] = {{"level", s.history.level},
                  {"mode_decay", s.history.mode_decay},
                  {"random", s.history.random},
                  {"random_stream", s.history.random_stream}};
  if (s.covariance.kind == CovarianceTag::Kind::power)
    j["covariance"] = {{"kind", "power"}, {"level", s.covariance.level},
                       {"exponent", s.covariance.exponent}};
  else
    j["covariance"] = {{"kind", "list"}, {"values", s.covariance.values}};
  if (s.gains.kind == ControlGains::Kind::uniform)
    j["control_gains"] = {{"kind", "uniform"}, {"value", s.gains.value}};
  else
    j["control_gains"] = {{"kind", "list"}, {"values", s.gains.values}};
  switch (s.memory.kind()) {
    case MemoryKernel::Kind::zero: j["memory_kernel"] = {{"kind", "zero"}}; break;
    case MemoryKernel::Kind::constant:
      j["memory_kernel"] = {{"kind", "constant"}, {"value", s.memory.amplitude()}};
      break;
    case MemoryKernel::Kind::exp_decay:
      j["memory_kernel"] = {{"kind", "exp_decay"}, {"amplitude", s.memory.amplitude()},
                            {"rate", s.memory.rate()}};
      break;
  }
  j["declared"] = {{"c1", s.declared.c1}, {"c2", s.declared.c2}, {"c3", s.declared.c3},
                   {"c4", s.declared.c4}, {"c5", s.declared.c5}, {"m_l", s.declared.m_l}};
  return j;
}

DelaySystemSpec spec_from_json(const json& j) {
  require_keys(j,
               {"modes", "horizon", "hurst", "max_delay", "delay_r", "delay_rho", "f", "g",
                "sigma", "history", "covariance", "control_gains", "memory_kernel", "declared"},
               "spec");
  DelaySystemSpec s;
  s.modes = need(j, "modes", "spec").get<std::size_t>();
  s.horizon = need(j, "horizon", "spec").get<double>();
  s.hurst = need(j, "hurst", "spec").get<double>();
  s.max_delay = need(j, "max_delay", "spec").get<double>();
  s.delay_r = delay_from_json(need(j, "delay_r", "spec"), "spec.delay_r");
  s.delay_rho = delay_from_json(need(j, "delay_rho", "spec"), "spec.delay_rho");
  s.f_shape = shape_from_json(need(j, "f", "spec"), "spec.f");
  s.g_shape = shape_from_json(need(j, "g", "spec"), "spec.g");

  const json& sig = need(j, "sigma", "spec");
  require_keys(sig, {"level", "mode_decay", "modulation", "holder_gamma"}, "spec.sigma");
  s.sigma = SigmaSpec{need(sig, "level", "spec.sigma").get<double>(),
                      need(sig, "mode_decay", "spec.sigma").get<double>(),
                      need(sig, "modulation", "spec.sigma").get<double>(),
                      need(sig, "holder_gamma", "spec.sigma").get<double>()};

  const json& hist = need(j, "history", "spec");
  require_keys(hist, {"level", "mode_decay", "random", "random_stream"}, "spec.history");
  s.history = HistorySpec{need(hist, "level", "spec.history").get<double>(),
                          need(hist, "mode_decay", "spec.history").get<double>(),
                          need(hist, "random", "spec.history").get<bool>(),
                          need(hist, "random_stream", "spec.history").get<std::uint64_t>()};

  const json& cov = need(j, "covariance", "spec");
  const std::string ck = need(cov, "kind", "spec.covariance").get<std::string>();
  if (ck == "power") {
    require_keys(cov, {"kind", "level", "exponent"}, "spec.covariance");
    s.covariance = CovarianceTag{CovarianceTag::Kind::power,
                                 need(cov, "level", "spec.covariance").get<double>(),
                                 need(cov, "exponent", "spec.covariance").get<double>(),
                                 {}};
  } else if (ck == "list") {
    require_keys(cov, {"kind", "values"}, "spec.covariance");
    s.covariance = CovarianceTag{CovarianceTag::Kind::list, 0.0, 0.0,
                                 need(cov, "values", "spec.covariance").get<std::vector<double>>()};
  } else {
    throw std::invalid_argument("spec.covariance: unknown kind '" + ck + "'");
  }

  const json& cg = need(j, "control_gains", "spec");
  const std::string gk = need(cg, "kind", "spec.control_gains").get<std::string>();
  if (gk == "uniform") {
    require_keys(cg, {"kind", "value"}, "spec.control_gains");
    s.gains = ControlGains{ControlGains::Kind::uniform,
                           need(cg, "value", "spec.control_gains").get<double>(),
                           {}};
  } else if (gk == "list") {
    require_keys(cg, {"kind", "values"}, "spec.control_gains");
    s.gains = ControlGains{ControlGains::Kind::list, 0.0,
                           need(cg, "values", "spec.control_gains").get<std::vector<double>>()};
  } else {
    throw std::invalid_argument("spec.control_gains: unknown kind '" + gk + "'");
  }

  const json& mk = need(j, "memory_kernel", "spec");
  const std::string mkk = need(mk, "kind", "spec.memory_kernel").get<std::string>();
  if (mkk == "zero") {
    require_keys(mk, {"kind"}, "spec.memory_kernel");
    s.memory = MemoryKernel::zero();
  } else if (mkk == "constant") {
    require_keys(mk, {"kind", "value"}, "spec.memory_kernel");
    s.memory = MemoryKernel::constant(need(mk, "value", "spec.memory_kernel").get<double>());
  } else if (mkk == "exp_decay") {
    require_keys(mk, {"kind", "amplitude", "rate"}, "spec.memory_kernel");
    s.memory = MemoryKernel::exp_decay(need(mk, "amplitude", "spec.memory_kernel").get<double>(),
                                       need(mk, "rate", "spec.memory_kernel").get<double>());
  } else {
    throw std::invalid_argument("spec.memory_kernel: unknown kind '" + mkk + "'");
  }

  const json& dec = need(j, "declared", "spec");
  require_keys(dec, {"c1", "c2", "c3", "c4", "c5", "m_l"}, "spec.declared");
  s.declared = DeclaredConstants{need(dec, "c1", "spec.declared").get<double>(),
                                 need(dec, "c2", "spec.declared").get<double>(),
                                 need(dec, "c3", "spec.declared").get<double>(),
                                 need(dec, "c4", "spec.declared").get<double>(),
                                 need(dec, "c5", "spec.declared").get<double>(),
                                 need(dec, "m_l", "spec.declared").get<double>()};
  return s;
}

DelaySystemSpec load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spec file: " + path);
  json j;
  in >> j;
  return spec_from_json(j);
}

void save_spec_file(const std::string& path, const DelaySystemSpec& spec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write spec file: " + path);
  out << spec_to_json(spec).dump(2) << "\n";
}

}  // namespace fbmsteer
