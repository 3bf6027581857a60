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

#ifndef GROUPSCOPE_ESF_HPP_
#define GROUPSCOPE_ESF_HPP_

#include <optional>
#include <string>
#include <vector>

#include "groupscope/embed.hpp"
#include "groupscope/error.hpp"
#include "groupscope/llm.hpp"

namespace groupscope::esf {

using Vector = std::vector<double>;

class DegenerateWhitelistError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual) : Error(what), residual(residual) {}
  double residual;
};

enum class Metric { euclidean, cosine };
enum class Mode { avg_radius, max_radius, ocsvm };
enum class KernelType { linear, rbf };

std::string_view to_string(Metric m);
std::string_view to_string(Mode m);
std::string_view to_string(KernelType k);
std::optional<Metric> parse_metric(std::string_view s);
std::optional<Mode> parse_mode(std::string_view s);
std::optional<KernelType> parse_kernel(std::string_view s);

struct Kernel {
  KernelType type = KernelType::rbf;
  double gamma = 1.0;  // rbf only

  double operator()(const Vector& a, const Vector& b) const;
};

// 1 / median squared pairwise distance; the median of an even count is the
// mean of the two middle values.
double median_heuristic_gamma(const std::vector<Vector>& points);

struct CenterFit {
  Vector center;
  double radius_avg = 0.0;
  double d_max = 0.0;
};

// Mean vector, mean distance to it, and maximum distance to it.
CenterFit fit_center(const std::vector<Vector>& whitelist);

struct OcsvmModel {
  double nu = 0.1;
  Kernel kernel;
  std::vector<double> alphas;           // one per training point
  std::vector<size_t> support_indices;  // alpha > 0
  std::vector<Vector> support_vectors;
  double rho = 0.0;
  size_t iterations = 0;
  double kkt_gap = 0.0;
  std::string training_digest;

  // f(x) = sum_i alpha_i k(x_i, x) - rho
  double decision(const Vector& x) const;
};

struct OcsvmOptions {
  double tolerance = 1e-6;
  // Iteration budget is cap_factor * N^2 pair updates.
  size_t cap_factor = 10;
};

// Solves the one-class dual: min 1/2 a'Ka, 0 <= a_i <= 1/(nu N), sum a = 1.
OcsvmModel fit_ocsvm(const std::vector<Vector>& whitelist, double nu, const Kernel& kernel,
                     const OcsvmOptions& options = {});

struct EsfModel {
  Metric metric = Metric::euclidean;
  Vector center;
  size_t n_whitelist = 0;
  double radius_avg = 0.0;
  double d_max = 0.0;
  std::optional<OcsvmModel> ocsvm;
  std::vector<std::string> whitelist_phrases;
  std::string whitelist_digest;

  // Projects x into the space the model was fitted in (unit sphere for cosine).
  Vector prepare(const Vector& x) const;
  double distance_to_center(const Vector& x) const;
  // Content digest of the serialized model.
  std::string digest() const;
};

struct EsfOptions {
  Metric metric = Metric::euclidean;
  bool fit_svm = true;
  double nu = 0.1;
  KernelType kernel = KernelType::rbf;
  std::optional<double> gamma;  // median heuristic when absent
  OcsvmOptions solver;
};

std::string whitelist_digest(const std::vector<embed::EmbeddingVector>& whitelist);

EsfModel fit(const std::vector<embed::EmbeddingVector>& whitelist, const EsfOptions& options = {});

struct Verdict {
  Mode classifier = Mode::avg_radius;
  bool accepted = false;
  double score = 0.0;  // distance for radial modes, f(x) for ocsvm
};

Verdict classify(const Vector& x, const EsfModel& model, Mode mode);

struct FilterResult {
  std::vector<llm::CandidateGroup> accepted;
  std::vector<llm::CandidateGroup> rejected;
  std::vector<llm::CandidateGroup> unresolved;  // no embedding
};

// Records every available verdict on each candidate and partitions by `mode`.
FilterResult filter_candidates(std::vector<llm::CandidateGroup> candidates, const EsfModel& model,
                               Mode mode);

std::string serialize_model(const EsfModel& model);
EsfModel parse_model(std::string_view json_text);

}  // namespace groupscope::esf

#endif  // GROUPSCOPE_ESF_HPP_
