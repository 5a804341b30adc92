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

#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace ifct {

/// 64-bit FNV-1a over `text`, offset by `seed`. Stable across platforms.
std::uint64_t stable_hash(std::string_view text, std::uint64_t seed = 0);

/// Text -> unit-length vector of fixed dimension. Equal inputs must give
/// identical vectors.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::vector<double> embed(const std::string& text) = 0;
  virtual std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts);
  virtual std::size_t dimension() const = 0;
  /// Providers that return false are wrapped by make_concurrency_safe before
  /// being shared between threads.
  virtual bool concurrent_safe() const { return false; }
};

/// Seeded hash of the text expanded into `dim` pseudo-random components in
/// [-1, 1), then L2-normalised.
class HashEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HashEmbeddingProvider(std::uint64_t seed, std::size_t dim = 64);

  std::vector<double> embed(const std::string& text) override;
  std::size_t dimension() const override { return dim_; }
  bool concurrent_safe() const override { return true; }

 private:
  std::uint64_t seed_;
  std::size_t dim_;
};

/// A labeler stand-in that "sees" intensity: each label owns a half-open HU
/// band and embeds as a basis vector; a lesion descriptor containing
/// "mean_hu=<h>" embeds as the normalised sum of the bands containing h.
/// Anything else falls back to a hash embedding orthogonal to every label.
class IntensityBandProvider final : public EmbeddingProvider {
 public:
  struct Band {
    std::string label;
    double lo = 0.0;  // inclusive
    double hi = 0.0;  // exclusive
  };

  explicit IntensityBandProvider(std::vector<Band> bands, std::uint64_t seed = 0);

  std::vector<double> embed(const std::string& text) override;
  std::size_t dimension() const override { return kDim; }
  bool concurrent_safe() const override { return true; }

  const std::vector<Band>& bands() const { return bands_; }

  static constexpr std::size_t kDim = 64;
  static constexpr std::size_t kMaxBands = 32;

 private:
  std::vector<Band> bands_;
  std::uint64_t seed_;
};

/// Serialises every call to the wrapped provider.
class SerializedProvider final : public EmbeddingProvider {
 public:
  explicit SerializedProvider(std::shared_ptr<EmbeddingProvider> inner) : inner_(std::move(inner)) {}

  std::vector<double> embed(const std::string& text) override;
  std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts) override;
  std::size_t dimension() const override { return inner_->dimension(); }
  bool concurrent_safe() const override { return true; }

 private:
  std::shared_ptr<EmbeddingProvider> inner_;
  std::mutex mutex_;
};

std::shared_ptr<EmbeddingProvider> make_concurrency_safe(std::shared_ptr<EmbeddingProvider> provider);

/// Normalises `v` in place; throws ZeroVector for an all-zero vector.
void normalize(std::vector<double>& v);

}  // namespace ifct
