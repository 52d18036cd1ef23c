// Copyright 2026 The eta-decompose Authors
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

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "eta/datastore.hpp"
#include "eta/types.hpp"

namespace eta {

struct UtteranceInfo {
  std::string utt_id;
  std::string speaker_id;
  std::size_t n_frames = 0;
};

// Random-access corpus of (embedding, frames) pairs. Implementations must be
// safe to read from several threads at once.
class UtteranceSource {
 public:
  virtual ~UtteranceSource() = default;

  virtual std::size_t size() const = 0;
  virtual const UtteranceInfo& info(std::size_t i) const = 0;
  virtual std::size_t q_dim() const = 0;
  virtual std::size_t v_dim() const = 0;

  virtual SpeakerEmbedding embedding(std::size_t i) const = 0;
  // `stored` receives the on-disk precision of the frames, when known.
  virtual FrameMatrix frames(std::size_t i, Precision* stored = nullptr) const = 0;

  std::string fingerprint() const;
};

// Corpus backed by a manifest and NPY files.
class ManifestSource final : public UtteranceSource {
 public:
  // Strict mode checks every referenced file's header up front.
  explicit ManifestSource(Manifest manifest, bool strict = true);
  static ManifestSource open(const fs::path& manifest_path, bool strict = true);

  std::size_t size() const override { return infos_.size(); }
  const UtteranceInfo& info(std::size_t i) const override { return infos_.at(i); }
  std::size_t q_dim() const override { return q_dim_; }
  std::size_t v_dim() const override { return v_dim_; }
  SpeakerEmbedding embedding(std::size_t i) const override;
  FrameMatrix frames(std::size_t i, Precision* stored = nullptr) const override;

  const Manifest& manifest() const { return manifest_; }

 private:
  Manifest manifest_;
  std::vector<UtteranceInfo> infos_;
  std::size_t q_dim_ = 0;
  std::size_t v_dim_ = 0;
};

}  // namespace eta
