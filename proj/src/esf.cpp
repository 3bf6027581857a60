// Copyright 2026 The GroupScope Authors.
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

#include "groupscope/esf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "groupscope/io.hpp"
#include "json.hpp"

namespace groupscope::esf {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string_view to_string(Metric m) { return m == Metric::euclidean ? "euclidean" : "cosine"; }
std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::avg_radius: return "avg_radius";
    case Mode::max_radius: return "max_radius";
    case Mode::ocsvm: return "ocsvm";
  }
  return "avg_radius";
}
std::string_view to_string(KernelType k) { return k == KernelType::linear ? "linear" : "rbf"; }

std::optional<Metric> parse_metric(std::string_view s) {
  if (s == "euclidean") return Metric::euclidean;
  if (s == "cosine") return Metric::cosine;
  return std::nullopt;
}
std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "avg_radius") return Mode::avg_radius;
  if (s == "max_radius") return Mode::max_radius;
  if (s == "ocsvm") return Mode::ocsvm;
  return std::nullopt;
}
std::optional<KernelType> parse_kernel(std::string_view s) {
  if (s == "linear") return KernelType::linear;
  if (s == "rbf") return KernelType::rbf;
  return std::nullopt;
}

namespace {

double squared_distance(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_uniform(const std::vector<Vector>& points) {
  if (points.empty()) return;
  size_t d = points.front().size();
  for (size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != d)
      throw ValidationError("dimension mismatch: point " + std::to_string(i) + " has " +
                            std::to_string(points[i].size()) + " components, expected " +
                            std::to_string(d));
    for (double v : points[i])
      if (!std::isfinite(v)) throw ValidationError("non-finite component in point " + std::to_string(i));
  }
}

std::string points_digest(const std::vector<Vector>& points, std::string_view extra) {
  std::string buf(extra);
  for (const auto& p : points) {
    for (double v : p) {
      buf += io::format_double(v);
      buf.push_back(' ');
    }
    buf.push_back('\n');
  }
  return io::sha256_hex(buf);
}

}  // namespace

double Kernel::operator()(const Vector& a, const Vector& b) const {
  if (type == KernelType::linear) return dot(a, b);
  return std::exp(-gamma * squared_distance(a, b));
}

double median_heuristic_gamma(const std::vector<Vector>& points) {
  std::vector<double> d2;
  for (size_t i = 0; i < points.size(); ++i)
    for (size_t j = i + 1; j < points.size(); ++j) d2.push_back(squared_distance(points[i], points[j]));
  if (d2.empty()) return 1.0;
  std::sort(d2.begin(), d2.end());
  size_t n = d2.size();
  double median = n % 2 ? d2[n / 2] : 0.5 * (d2[n / 2 - 1] + d2[n / 2]);
  return median > 0.0 ? 1.0 / median : 1.0;
}

CenterFit fit_center(const std::vector<Vector>& whitelist) {
  if (whitelist.size() < 2)
    throw DegenerateWhitelistError("whitelist needs at least 2 embeddings, got " +
                                   std::to_string(whitelist.size()));
  check_uniform(whitelist);
  const size_t n = whitelist.size();
  const size_t d = whitelist.front().size();
  CenterFit fit;
  fit.center.assign(d, 0.0);
  for (const auto& x : whitelist)
    for (size_t k = 0; k < d; ++k) fit.center[k] += x[k];
  for (double& c : fit.center) c /= static_cast<double>(n);

  double sum = 0.0;
  for (const auto& x : whitelist) {
    double dist = std::sqrt(squared_distance(x, fit.center));
    sum += dist;
    fit.d_max = std::max(fit.d_max, dist);
  }
  // The mean of values bounded by d_max can exceed it by rounding only.
  fit.radius_avg = std::min(sum / static_cast<double>(n), fit.d_max);
  return fit;
}

double OcsvmModel::decision(const Vector& x) const {
  double s = 0.0;
  for (size_t k = 0; k < support_indices.size(); ++k)
    s += alphas[support_indices[k]] * kernel(support_vectors[k], x);
  return s - rho;
}

OcsvmModel fit_ocsvm(const std::vector<Vector>& whitelist, double nu, const Kernel& kernel,
                     const OcsvmOptions& options) {
  if (!(nu > 0.0 && nu <= 1.0)) throw ValidationError("nu must lie in (0, 1]");
  if (whitelist.size() < 2)
    throw DegenerateWhitelistError("one-class SVM needs at least 2 training points");
  check_uniform(whitelist);
  if (kernel.type == KernelType::rbf && !(kernel.gamma > 0.0))
    throw ValidationError("rbf gamma must be positive");

  const size_t n = whitelist.size();
  const double upper = 1.0 / (nu * static_cast<double>(n));

  std::vector<double> K(n * n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i; j < n; ++j) K[i * n + j] = K[j * n + i] = kernel(whitelist[i], whitelist[j]);

  // Feasible start: fill the first points up to the box bound.
  std::vector<double> alpha(n, 0.0);
  double remaining = 1.0;
  for (size_t i = 0; i < n && remaining > 0.0; ++i) {
    alpha[i] = std::min(upper, remaining);
    remaining -= alpha[i];
  }

  std::vector<double> grad(n, 0.0);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) grad[i] += K[i * n + j] * alpha[j];

  const size_t cap = options.cap_factor * n * n;
  size_t iter = 0;
  double gap = 0.0;
  for (;; ++iter) {
    // Maximal violating pair: raise the alpha with the smallest gradient,
    // lower the one with the largest. Ties go to the lowest index.
    size_t up = n, down = n;
    for (size_t k = 0; k < n; ++k) {
      if (alpha[k] < upper && (up == n || grad[k] < grad[up])) up = k;
      if (alpha[k] > 0.0 && (down == n || grad[k] > grad[down])) down = k;
    }
    gap = (up == n || down == n) ? 0.0 : grad[down] - grad[up];
    if (gap <= options.tolerance) break;
    if (iter >= cap) {
      throw SolverError("one-class SVM did not converge within " + std::to_string(cap) +
                            " iterations (KKT gap " + io::format_double(gap) + ")",
                        gap);
    }
    double eta = K[up * n + up] + K[down * n + down] - 2.0 * K[up * n + down];
    if (eta < 1e-12) eta = 1e-12;
    double room_up = upper - alpha[up];
    double room_down = alpha[down];
    double step = gap / eta;
    if (step >= room_up || step >= room_down) {
      step = std::min(room_up, room_down);
      if (step == room_up) {
        alpha[up] = upper;
        alpha[down] -= step;
      } else {
        alpha[down] = 0.0;
        alpha[up] += step;
      }
      if (alpha[down] < 0.0) alpha[down] = 0.0;
    } else {
      alpha[up] += step;
      alpha[down] -= step;
    }
    for (size_t k = 0; k < n; ++k) grad[k] += step * (K[k * n + up] - K[k * n + down]);
  }

  OcsvmModel model;
  model.nu = nu;
  model.kernel = kernel;
  model.alphas = alpha;
  model.iterations = iter;
  model.kkt_gap = gap;

  const double eps = 1e-12 * upper;
  double free_sum = 0.0;
  size_t free_count = 0;
  double lower_bound = -std::numeric_limits<double>::infinity();  // from alpha == upper
  double upper_bound = std::numeric_limits<double>::infinity();   // from alpha == 0
  for (size_t k = 0; k < n; ++k) {
    if (alpha[k] > eps && alpha[k] < upper - eps) {
      free_sum += grad[k];
      ++free_count;
    } else if (alpha[k] <= eps) {
      upper_bound = std::min(upper_bound, grad[k]);
    } else {
      lower_bound = std::max(lower_bound, grad[k]);
    }
  }
  if (free_count > 0) model.rho = free_sum / static_cast<double>(free_count);
  else if (std::isfinite(upper_bound) && std::isfinite(lower_bound)) model.rho = 0.5 * (upper_bound + lower_bound);
  else model.rho = std::isfinite(lower_bound) ? lower_bound : upper_bound;

  for (size_t k = 0; k < n; ++k) {
    if (alpha[k] > 0.0) {
      model.support_indices.push_back(k);
      model.support_vectors.push_back(whitelist[k]);
    }
  }
  std::string params = "nu=" + io::format_double(nu) + ";kernel=" + std::string(to_string(kernel.type)) +
                       ";gamma=" + io::format_double(kernel.gamma) + "\n";
  model.training_digest = points_digest(whitelist, params);
  return model;
}

Vector EsfModel::prepare(const Vector& x) const {
  if (x.size() != center.size())
    throw ValidationError("dimension mismatch: query has " + std::to_string(x.size()) +
                          " components, model has " + std::to_string(center.size()));
  if (metric == Metric::euclidean) return x;
  double norm = std::sqrt(dot(x, x));
  if (norm == 0.0) throw ValidationError("cosine metric cannot place a zero vector");
  Vector out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] / norm;
  return out;
}

double EsfModel::distance_to_center(const Vector& x) const {
  return std::sqrt(squared_distance(prepare(x), center));
}

std::string EsfModel::digest() const { return io::sha256_hex(serialize_model(*this)); }

std::string whitelist_digest(const std::vector<embed::EmbeddingVector>& whitelist) {
  std::string buf;
  for (const auto& e : whitelist) {
    buf += e.phrase;
    for (double v : e.vector) {
      buf.push_back('\t');
      buf += io::format_double(v);
    }
    buf.push_back('\n');
  }
  return io::sha256_hex(buf);
}

EsfModel fit(const std::vector<embed::EmbeddingVector>& whitelist, const EsfOptions& options) {
  if (whitelist.size() < 2)
    throw DegenerateWhitelistError("whitelist needs at least 2 embeddings, got " +
                                   std::to_string(whitelist.size()));
  EsfModel model;
  model.metric = options.metric;
  model.center.assign(whitelist.front().vector.size(), 0.0);

  std::vector<Vector> points;
  points.reserve(whitelist.size());
  for (const auto& e : whitelist) {
    if (e.vector.size() != model.center.size())
      throw ValidationError("dimension mismatch in whitelist entry \"" + e.phrase + "\"");
    points.push_back(model.prepare(e.vector));
    model.whitelist_phrases.push_back(e.phrase);
  }
  CenterFit c = fit_center(points);
  model.center = std::move(c.center);
  model.radius_avg = c.radius_avg;
  model.d_max = c.d_max;
  model.n_whitelist = points.size();
  model.whitelist_digest = whitelist_digest(whitelist);
  if (options.fit_svm) {
    Kernel kernel{options.kernel, 1.0};
    if (options.kernel == KernelType::rbf) kernel.gamma = options.gamma.value_or(median_heuristic_gamma(points));
    model.ocsvm = fit_ocsvm(points, options.nu, kernel, options.solver);
  }
  return model;
}

Verdict classify(const Vector& x, const EsfModel& model, Mode mode) {
  Vector p = model.prepare(x);
  Verdict v;
  v.classifier = mode;
  switch (mode) {
    case Mode::avg_radius:
      v.score = std::sqrt(squared_distance(p, model.center));
      v.accepted = v.score <= model.radius_avg;
      break;
    case Mode::max_radius:
      v.score = std::sqrt(squared_distance(p, model.center));
      v.accepted = v.score <= model.d_max;
      break;
    case Mode::ocsvm:
      if (!model.ocsvm) throw ValidationError("model has no fitted one-class SVM");
      v.score = model.ocsvm->decision(p);
      v.accepted = v.score >= 0.0;
      break;
  }
  return v;
}

FilterResult filter_candidates(std::vector<llm::CandidateGroup> candidates, const EsfModel& model,
                               Mode mode) {
  if (mode == Mode::ocsvm && !model.ocsvm) throw ValidationError("model has no fitted one-class SVM");
  FilterResult out;
  for (auto& c : candidates) {
    c.verdicts.clear();
    if (!c.embedding) {
      out.unresolved.push_back(std::move(c));
      continue;
    }
    bool accepted = false;
    std::vector<Mode> modes = {Mode::avg_radius, Mode::max_radius};
    if (model.ocsvm) modes.push_back(Mode::ocsvm);
    for (Mode m : modes) {
      Verdict v = classify(c.embedding->vector, model, m);
      c.verdicts.push_back({std::string(to_string(m)), v.accepted, v.score});
      if (m == mode) accepted = v.accepted;
    }
    (accepted ? out.accepted : out.rejected).push_back(std::move(c));
  }
  return out;
}

std::string serialize_model(const EsfModel& model) {
  ojson j;
  j["metric"] = to_string(model.metric);
  j["n_whitelist"] = model.n_whitelist;
  j["center"] = model.center;
  j["radius_avg"] = model.radius_avg;
  j["d_max"] = model.d_max;
  j["whitelist_digest"] = model.whitelist_digest;
  j["whitelist_phrases"] = model.whitelist_phrases;
  if (model.ocsvm) {
    const auto& s = *model.ocsvm;
    ojson o;
    o["nu"] = s.nu;
    o["kernel"] = to_string(s.kernel.type);
    o["gamma"] = s.kernel.gamma;
    o["rho"] = s.rho;
    o["alphas"] = s.alphas;
    o["support_indices"] = s.support_indices;
    std::vector<std::string> phrases;
    for (size_t idx : s.support_indices)
      phrases.push_back(idx < model.whitelist_phrases.size() ? model.whitelist_phrases[idx] : "");
    o["support_phrases"] = phrases;
    o["support_vectors"] = s.support_vectors;
    o["iterations"] = s.iterations;
    o["kkt_gap"] = s.kkt_gap;
    o["training_digest"] = s.training_digest;
    j["ocsvm"] = std::move(o);
  } else {
    j["ocsvm"] = nullptr;
  }
  return j.dump(2) + "\n";
}

EsfModel parse_model(std::string_view json_text) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ValidationError("ESF model is not a JSON object");
  EsfModel m;
  try {
    auto metric = parse_metric(j.at("metric").get<std::string>());
    if (!metric) throw ValidationError("unknown metric");
    m.metric = *metric;
    m.n_whitelist = j.at("n_whitelist").get<size_t>();
    m.center = j.at("center").get<Vector>();
    m.radius_avg = j.at("radius_avg").get<double>();
    m.d_max = j.at("d_max").get<double>();
    m.whitelist_digest = j.at("whitelist_digest").get<std::string>();
    m.whitelist_phrases = j.at("whitelist_phrases").get<std::vector<std::string>>();
    if (j.contains("ocsvm") && j["ocsvm"].is_object()) {
      const auto& o = j["ocsvm"];
      OcsvmModel s;
      s.nu = o.at("nu").get<double>();
      auto kt = parse_kernel(o.at("kernel").get<std::string>());
      if (!kt) throw ValidationError("unknown kernel");
      s.kernel = Kernel{*kt, o.at("gamma").get<double>()};
      s.rho = o.at("rho").get<double>();
      s.alphas = o.at("alphas").get<std::vector<double>>();
      s.support_indices = o.at("support_indices").get<std::vector<size_t>>();
      s.support_vectors = o.at("support_vectors").get<std::vector<Vector>>();
      s.iterations = o.value("iterations", size_t{0});
      s.kkt_gap = o.value("kkt_gap", 0.0);
      s.training_digest = o.value("training_digest", "");
      if (s.support_indices.size() != s.support_vectors.size())
        throw ValidationError("support index/vector count mismatch");
      for (size_t idx : s.support_indices)
        if (idx >= s.alphas.size()) throw ValidationError("support index out of range");
      m.ocsvm = std::move(s);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed ESF model: ") + e.what());
  }
  return m;
}

}  // namespace groupscope::esf
