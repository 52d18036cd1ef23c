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

#include "eta/source.hpp"

#include "eta/error.hpp"

namespace eta {

std::string UtteranceSource::fingerprint() const {
  std::vector<ManifestEntry> entries;
  entries.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    ManifestEntry e;
    e.utt_id = info(i).utt_id;
    e.n_frames = info(i).n_frames;
    e.q_dim = q_dim();
    e.v_dim = v_dim();
    entries.push_back(std::move(e));
  }
  return dataset_fingerprint(entries);
}

ManifestSource::ManifestSource(Manifest manifest, bool strict) : manifest_(std::move(manifest)) {
  validate_manifest(manifest_, strict);
  q_dim_ = manifest_.entries.front().q_dim;
  v_dim_ = manifest_.entries.front().v_dim;
  infos_.reserve(manifest_.entries.size());
  for (const auto& e : manifest_.entries) {
    infos_.push_back(UtteranceInfo{e.utt_id, e.speaker_id, e.n_frames});
  }
}

ManifestSource ManifestSource::open(const fs::path& manifest_path, bool strict) {
  return ManifestSource(load_manifest(manifest_path), strict);
}

SpeakerEmbedding ManifestSource::embedding(std::size_t i) const {
  const auto& e = manifest_.entries.at(i);
  SpeakerEmbedding out{e.utt_id, read_vector(manifest_.embedding_file(e))};
  validate(out, v_dim_);
  return out;
}

FrameMatrix ManifestSource::frames(std::size_t i, Precision* stored) const {
  const auto& e = manifest_.entries.at(i);
  FrameMatrix out{e.utt_id, read_matrix(manifest_.feature_file(e), stored)};
  require(out.frames() == e.n_frames, Errc::kShapeMismatch,
          "utterance '" + e.utt_id + "': stored " + std::to_string(out.frames()) +
              " frames, manifest declares " + std::to_string(e.n_frames));
  validate(out, q_dim_);
  return out;
}

}  // namespace eta
