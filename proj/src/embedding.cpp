// Copyright 2026 The ifct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ifct/embedding.hpp"

#include <cmath>
#include <cstdlib>
#include <random>

#include "ifct/error.hpp"

namespace ifct {
namespace {

std::vector<double> hashed_components(std::string_view text, std::uint64_t seed, std::size_t dim) {
  std::mt19937_64 rng(stable_hash(text, seed));
  std::vector<double> v(dim);
  for (double& x : v) x = double(rng() >> 11) * 0x1.0p-52 - 1.0;
  return v;
}

}  // namespace

std::uint64_t stable_hash(std::string_view text, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ull ^ (seed * 0x9e3779b97f4a7c15ull);
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

void normalize(std::vector<double>& v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm == 0.0) throw ZeroVector("cannot normalise a zero vector");
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
}

std::vector<std::vector<double>> EmbeddingProvider::embed_batch(const std::vector<std::string>& texts) {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

HashEmbeddingProvider::HashEmbeddingProvider(std::uint64_t seed, std::size_t dim) : seed_(seed), dim_(dim) {
  if (dim == 0) throw InvalidArgument("embedding dimension must be positive");
}

std::vector<double> HashEmbeddingProvider::embed(const std::string& text) {
  auto v = hashed_components(text, seed_, dim_);
  normalize(v);
  return v;
}

IntensityBandProvider::IntensityBandProvider(std::vector<Band> bands, std::uint64_t seed)
    : bands_(std::move(bands)), seed_(seed) {
  if (bands_.size() > kMaxBands) throw InvalidArgument("too many intensity bands");
  for (const auto& b : bands_) {
    if (!(b.lo < b.hi)) throw InvalidArgument("intensity band '" + b.label + "' is empty");
  }
}

std::vector<double> IntensityBandProvider::embed(const std::string& text) {
  std::vector<double> v(kDim, 0.0);
  for (std::size_t n = 0; n < bands_.size(); ++n) {
    if (bands_[n].label == text) {
      v[n] = 1.0;
      return v;
    }
  }
  static constexpr std::string_view kKey = "mean_hu=";
  if (const auto at = text.find(kKey); at != std::string::npos) {
    const char* begin = text.c_str() + at + kKey.size();
    char* end = nullptr;
    const double hu = std::strtod(begin, &end);
    if (end != begin) {
      bool any = false;
      for (std::size_t n = 0; n < bands_.size(); ++n) {
        if (hu >= bands_[n].lo && hu < bands_[n].hi) {
          v[n] = 1.0;
          any = true;
        }
      }
      if (any) {
        normalize(v);
        return v;
      }
    }
  }
  auto tail = hashed_components(text, seed_, kDim - kMaxBands);
  std::copy(tail.begin(), tail.end(), v.begin() + kMaxBands);
  normalize(v);
  return v;
}

std::vector<double> SerializedProvider::embed(const std::string& text) {
  std::lock_guard lock(mutex_);
  return inner_->embed(text);
}

std::vector<std::vector<double>> SerializedProvider::embed_batch(const std::vector<std::string>& texts) {
  std::lock_guard lock(mutex_);
  return inner_->embed_batch(texts);
}

std::shared_ptr<EmbeddingProvider> make_concurrency_safe(std::shared_ptr<EmbeddingProvider> provider) {
  if (!provider || provider->concurrent_safe()) return provider;
  return std::make_shared<SerializedProvider>(std::move(provider));
}

}  // namespace ifct
