#include <algorithm>
#include <bit>
#include <numeric>

#include "synthrel/error.hpp"
#include "synthrel/learners.hpp"
#include "synthrel/random.hpp"

namespace synthrel {

namespace {

std::uint64_t row_hash(std::span<const double> row) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (double v : row) {
    if (v == 0.0) v = 0.0;  // fold -0.0 onto +0.0
    h = mix64(h ^ std::bit_cast<std::uint64_t>(v));
  }
  return h;
}

}  // namespace

std::vector<int> stratified_folds(const FeatureMatrix& X, std::span<const double> y, int k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("stratified k-fold needs k >= 2");
  if (y.size() != X.rows) throw InvalidArgument("label count does not match feature rows");

  std::vector<double> classes(y.begin(), y.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

  std::vector<int> folds(y.size(), -1);
  std::size_t dealt = 0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    std::vector<std::pair<std::uint64_t, std::size_t>> members;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == classes[c]) members.emplace_back(row_hash(X.row(i)), i);
    if (members.size() < static_cast<std::size_t>(k))
      throw InvalidArgument("class count " + std::to_string(members.size()) + " is below the fold count " +
                            std::to_string(k));
    std::sort(members.begin(), members.end());
    Rng rng(derive_seed(seed, c));
    rng.shuffle(members);
    for (const auto& m : members) folds[m.second] = static_cast<int>(dealt++ % static_cast<std::size_t>(k));
  }
  return folds;
}

CrossValidation cross_validate(const LearnerSpec& spec, const FeatureMatrix& X, std::span<const double> y, int k,
                               std::uint64_t seed) {
  CrossValidation cv;
  cv.folds = stratified_folds(X, y, k, seed);
  cv.losses.assign(X.rows, 0);
  cv.probabilities.assign(X.rows, 0.5);

  for (int f = 0; f < k; ++f) {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < X.rows; ++i) (cv.folds[i] == f ? test : train).push_back(i);
    std::vector<double> ytrain;
    ytrain.reserve(train.size());
    for (auto i : train) ytrain.push_back(y[i]);

    auto model = fit(spec, X.take_rows(train), ytrain);
    for (auto i : test) {
      const double p = model->predict(X.row(i));
      cv.probabilities[i] = p;
      cv.losses[i] = static_cast<std::uint8_t>((p > 0.5 ? 1.0 : 0.0) != y[i]);
    }
  }
  return cv;
}

std::vector<std::uint8_t> stratified_kfold_losses(const LearnerSpec& spec, const FeatureMatrix& X,
                                                  std::span<const double> y, int k, std::uint64_t seed) {
  return cross_validate(spec, X, y, k, seed).losses;
}

}  // namespace synthrel
