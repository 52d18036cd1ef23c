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

#include "eta/datastore.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "eta/error.hpp"
#include "eta/rng.hpp"

namespace eta {

using nlohmann::json;
using nlohmann::ordered_json;

const char* precision_name(Precision p) noexcept {
  return p == Precision::kF32 ? "f32" : "f64";
}

namespace {

constexpr std::array<char, 6> kMagic = {'\x93', 'N', 'U', 'M', 'P', 'Y'};

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
}

std::size_t item_size(Precision p) { return p == Precision::kF32 ? 4 : 8; }

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  if (shape.size() == 1) s += ",";
  s += ")";
  return s;
}

// Minimal reader for the Python dict literal in an NPY header.
class HeaderParser {
 public:
  HeaderParser(std::string text, std::string path) : s_(std::move(text)), path_(std::move(path)) {}

  NpyHeader parse() {
    bool have_descr = false, have_order = false, have_shape = false;
    std::string descr;
    bool fortran = false;
    std::vector<std::size_t> shape;

    skip_ws();
    expect('{');
    while (true) {
      skip_ws();
      if (peek() == '}') break;
      const std::string key = quoted();
      skip_ws();
      expect(':');
      skip_ws();
      if (key == "descr") {
        descr = quoted();
        have_descr = true;
      } else if (key == "fortran_order") {
        fortran = boolean();
        have_order = true;
      } else if (key == "shape") {
        shape = tuple();
        have_shape = true;
      } else {
        bad("unexpected key '" + key + "'");
      }
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      skip_ws();
      if (peek() == '}') break;
      bad("expected ',' or '}'");
    }
    if (!have_descr || !have_order || !have_shape) bad("missing descr/fortran_order/shape");

    NpyHeader h;
    if (descr == "<f4") {
      h.precision = Precision::kF32;
    } else if (descr == "<f8") {
      h.precision = Precision::kF64;
    } else {
      fail(Errc::kUnsupportedDtype, path_ + ": unsupported dtype '" + descr + "'");
    }
    if (fortran) fail(Errc::kUnsupportedDtype, path_ + ": fortran_order arrays are not supported");
    if (shape.empty() || shape.size() > 2) {
      fail(Errc::kShapeRankError,
           path_ + ": only rank-1 and rank-2 arrays are supported, got rank " +
               std::to_string(shape.size()));
    }
    h.shape = std::move(shape);
    return h;
  }

 private:
  [[noreturn]] void bad(const std::string& what) {
    fail(Errc::kMalformedHeader, path_ + ": malformed NPY header: " + what);
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n')) ++pos_;
  }
  void expect(char c) {
    if (peek() != c) bad(std::string("expected '") + c + "'");
    ++pos_;
  }
  std::string quoted() {
    const char q = peek();
    if (q != '\'' && q != '"') bad("expected a quoted string");
    ++pos_;
    const auto end = s_.find(q, pos_);
    if (end == std::string::npos) bad("unterminated string");
    std::string out = s_.substr(pos_, end - pos_);
    pos_ = end + 1;
    return out;
  }
  bool boolean() {
    if (s_.compare(pos_, 4, "True") == 0) {
      pos_ += 4;
      return true;
    }
    if (s_.compare(pos_, 5, "False") == 0) {
      pos_ += 5;
      return false;
    }
    bad("expected True or False");
  }
  std::vector<std::size_t> tuple() {
    expect('(');
    std::vector<std::size_t> out;
    while (true) {
      skip_ws();
      if (peek() == ')') {
        ++pos_;
        return out;
      }
      std::size_t v = 0;
      const char* first = s_.data() + pos_;
      const char* last = s_.data() + s_.size();
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr == first) bad("bad shape entry");
      pos_ += static_cast<std::size_t>(ptr - first);
      out.push_back(v);
      skip_ws();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != ')') {
        bad("bad shape tuple");
      }
    }
  }

  std::string s_;
  std::string path_;
  std::size_t pos_ = 0;
};

NpyHeader parse_header_stream(std::istream& in, std::uintmax_t file_size, const std::string& path) {
  std::array<char, 8> pre{};
  if (!in.read(pre.data(), pre.size())) {
    fail(Errc::kMalformedHeader, path + ": truncated NPY preamble");
  }
  if (!std::equal(kMagic.begin(), kMagic.end(), pre.begin())) {
    fail(Errc::kMalformedHeader, path + ": missing NPY magic");
  }
  const auto major = static_cast<unsigned char>(pre[6]);
  std::size_t header_len = 0;
  std::size_t prefix = 0;
  if (major == 1) {
    std::array<unsigned char, 2> b{};
    if (!in.read(reinterpret_cast<char*>(b.data()), 2)) {
      fail(Errc::kMalformedHeader, path + ": truncated header length");
    }
    header_len = b[0] | (std::size_t{b[1]} << 8);
    prefix = 10;
  } else if (major == 2 || major == 3) {
    std::array<unsigned char, 4> b{};
    if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
      fail(Errc::kMalformedHeader, path + ": truncated header length");
    }
    header_len = b[0] | (std::size_t{b[1]} << 8) | (std::size_t{b[2]} << 16) |
                 (std::size_t{b[3]} << 24);
    prefix = 12;
  } else {
    fail(Errc::kMalformedHeader, path + ": unsupported NPY version " + std::to_string(major));
  }
  if (prefix + header_len > file_size) {
    fail(Errc::kMalformedHeader, path + ": truncated NPY header");
  }
  std::string text(header_len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(header_len))) {
    fail(Errc::kMalformedHeader, path + ": truncated NPY header");
  }
  NpyHeader h = HeaderParser(text, path).parse();
  h.data_offset = prefix + header_len;
  std::uintmax_t count = 1;
  for (auto d : h.shape) count *= d;
  const std::uintmax_t need = count * item_size(h.precision);
  if (file_size - h.data_offset != need) {
    fail(Errc::kMalformedHeader, path + ": data section has " +
                                     std::to_string(file_size - h.data_offset) +
                                     " bytes, header implies " + std::to_string(need));
  }
  return h;
}

std::ifstream open_in(const fs::path& path, std::uintmax_t* size) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) fail(Errc::kIoError, path.string() + ": no such file");
  *size = fs::file_size(path, ec);
  if (ec) fail(Errc::kIoError, path.string() + ": " + ec.message());
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::kIoError, path.string() + ": cannot open for reading");
  return in;
}

}  // namespace

std::size_t NpyArray::element_count() const {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string npy_header_bytes(const std::vector<std::size_t>& shape, Precision precision) {
  std::string dict = std::string("{'descr': '") + (precision == Precision::kF32 ? "<f4" : "<f8") +
                     "', 'fortran_order': False, 'shape': " + shape_string(shape) + ", }";
  const std::size_t unpadded = kMagic.size() + 2 + 2 + dict.size() + 1;
  const std::size_t pad = (64 - unpadded % 64) % 64;
  dict.append(pad, ' ');
  dict.push_back('\n');
  std::string out(kMagic.begin(), kMagic.end());
  out.push_back('\x01');
  out.push_back('\x00');
  out.push_back(static_cast<char>(dict.size() & 0xff));
  out.push_back(static_cast<char>((dict.size() >> 8) & 0xff));
  out += dict;
  return out;
}

void write_array(const fs::path& path, const NpyArray& array) {
  if (array.shape.empty() || array.shape.size() > 2) {
    fail(Errc::kUnsupportedShape, path.string() + ": only rank-1 and rank-2 arrays can be written");
  }
  require(array.data.size() == array.element_count(), Errc::kInvalidArgument,
          path.string() + ": data length does not match shape");
  for (double v : array.data) {
    if (!std::isfinite(v)) fail(Errc::kNonFinite, path.string() + ": refusing to write non-finite data");
  }
  std::string bytes = npy_header_bytes(array.shape, array.precision);
  const std::size_t off = bytes.size();
  bytes.resize(off + array.data.size() * item_size(array.precision));
  char* p = bytes.data() + off;
  if (array.precision == Precision::kF32) {
    for (double v : array.data) {
      const auto w = to_little(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
      std::memcpy(p, &w, 4);
      p += 4;
    }
  } else {
    for (double v : array.data) {
      const auto w = to_little(std::bit_cast<std::uint64_t>(v));
      std::memcpy(p, &w, 8);
      p += 8;
    }
  }
  write_text_file(path, bytes);
}

void write_matrix(const fs::path& path, const Eigen::Ref<const Matrix>& m, Precision precision) {
  NpyArray a;
  a.shape = {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())};
  a.precision = precision;
  a.data.resize(static_cast<std::size_t>(m.size()));
  // Ref<const RowMajor> may still carry an outer stride, so copy row by row.
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) a.data[k++] = m(r, c);
  }
  write_array(path, a);
}

void write_vector(const fs::path& path, const Eigen::Ref<const Vector>& v, Precision precision) {
  NpyArray a;
  a.shape = {static_cast<std::size_t>(v.size())};
  a.precision = precision;
  a.data.assign(v.data(), v.data() + v.size());
  write_array(path, a);
}

NpyHeader read_array_header(const fs::path& path) {
  std::uintmax_t size = 0;
  auto in = open_in(path, &size);
  return parse_header_stream(in, size, path.string());
}

NpyArray read_array(const fs::path& path) {
  std::uintmax_t size = 0;
  auto in = open_in(path, &size);
  NpyHeader h = parse_header_stream(in, size, path.string());
  NpyArray a;
  a.shape = h.shape;
  a.precision = h.precision;
  const std::size_t n = a.element_count();
  const std::size_t isz = item_size(h.precision);
  std::string raw(n * isz, '\0');
  if (!in.read(raw.data(), static_cast<std::streamsize>(raw.size()))) {
    fail(Errc::kMalformedHeader, path.string() + ": truncated data section");
  }
  a.data.resize(n);
  const char* p = raw.data();
  if (h.precision == Precision::kF32) {
    for (std::size_t i = 0; i < n; ++i, p += 4) {
      std::uint32_t w;
      std::memcpy(&w, p, 4);
      a.data[i] = static_cast<double>(std::bit_cast<float>(to_little(w)));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i, p += 8) {
      std::uint64_t w;
      std::memcpy(&w, p, 8);
      a.data[i] = std::bit_cast<double>(to_little(w));
    }
  }
  return a;
}

Matrix to_matrix(const NpyArray& a) {
  if (a.rank() == 1) {
    return Eigen::Map<const Matrix>(a.data.data(), 1, static_cast<Eigen::Index>(a.shape[0]));
  }
  require(a.rank() == 2, Errc::kShapeRankError, "expected a rank-1 or rank-2 array");
  return Eigen::Map<const Matrix>(a.data.data(), static_cast<Eigen::Index>(a.shape[0]),
                                  static_cast<Eigen::Index>(a.shape[1]));
}

Vector to_vector(const NpyArray& a) {
  const bool ok = a.rank() == 1 || (a.rank() == 2 && a.shape[0] == 1);
  require(ok, Errc::kShapeRankError, "expected a vector or a single-row matrix");
  return Eigen::Map<const Vector>(a.data.data(), static_cast<Eigen::Index>(a.data.size()));
}

Matrix read_matrix(const fs::path& path, Precision* precision) {
  NpyArray a = read_array(path);
  if (precision) *precision = a.precision;
  return to_matrix(a);
}

Vector read_vector(const fs::path& path, Precision* precision) {
  NpyArray a = read_array(path);
  if (precision) *precision = a.precision;
  try {
    return to_vector(a);
  } catch (const Error& e) {
    fail(e.code(), path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Manifests

namespace {

const char* const kManifestFields[] = {"utt_id",   "speaker_id", "feature_path", "embedding_path",
                                       "n_frames", "q_dim",      "v_dim"};

std::string line_tag(const fs::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

}  // namespace

Manifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::kIoError, path.string() + ": cannot open manifest");
  Manifest m;
  m.base_dir = path.parent_path();
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(Errc::kBadJson, line_tag(path, line_no) + ": " + e.what());
    }
    if (!obj.is_object()) fail(Errc::kBadJson, line_tag(path, line_no) + ": expected a JSON object");
    for (const char* f : kManifestFields) {
      if (!obj.contains(f)) {
        fail(Errc::kMissingField, line_tag(path, line_no) + ": missing field '" + f + "'");
      }
    }
    ManifestEntry e;
    try {
      e.utt_id = obj.at("utt_id").get<std::string>();
      e.speaker_id = obj.at("speaker_id").get<std::string>();
      e.feature_path = obj.at("feature_path").get<std::string>();
      e.embedding_path = obj.at("embedding_path").get<std::string>();
      for (const char* f : {"n_frames", "q_dim", "v_dim"}) {
        if (!obj.at(f).is_number_unsigned()) {
          fail(Errc::kBadJson, line_tag(path, line_no) + ": field '" + f +
                                   "' must be a non-negative integer");
        }
      }
      e.n_frames = obj.at("n_frames").get<std::size_t>();
      e.q_dim = obj.at("q_dim").get<std::size_t>();
      e.v_dim = obj.at("v_dim").get<std::size_t>();
    } catch (const json::exception& ex) {
      fail(Errc::kBadJson, line_tag(path, line_no) + ": " + ex.what());
    }
    if (!seen.insert(e.utt_id).second) {
      fail(Errc::kDuplicateUttId,
           line_tag(path, line_no) + ": duplicate utt_id '" + e.utt_id + "'");
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    ordered_json j;
    j["utt_id"] = e.utt_id;
    j["speaker_id"] = e.speaker_id;
    j["feature_path"] = e.feature_path;
    j["embedding_path"] = e.embedding_path;
    j["n_frames"] = e.n_frames;
    j["q_dim"] = e.q_dim;
    j["v_dim"] = e.v_dim;
    out += j.dump();
    out += '\n';
  }
  write_text_file(path, out);
}

void validate_manifest(const Manifest& manifest, bool strict) {
  require(!manifest.entries.empty(), Errc::kValidationError, "manifest has no entries");
  const std::size_t q = manifest.entries.front().q_dim;
  const std::size_t v = manifest.entries.front().v_dim;
  for (const auto& e : manifest.entries) {
    require(e.q_dim == q && e.v_dim == v, Errc::kValidationError,
            "utterance '" + e.utt_id + "' declares dims (q=" + std::to_string(e.q_dim) +
                ", v=" + std::to_string(e.v_dim) + ") but the corpus uses (q=" +
                std::to_string(q) + ", v=" + std::to_string(v) + ")");
    require(e.n_frames >= 1 && e.q_dim >= 1 && e.v_dim >= 1, Errc::kValidationError,
            "utterance '" + e.utt_id + "' declares an empty shape");
    if (!strict) continue;
    NpyHeader fh, eh;
    try {
      fh = read_array_header(manifest.feature_file(e));
      eh = read_array_header(manifest.embedding_file(e));
    } catch (const Error& err) {
      fail(Errc::kValidationError, "utterance '" + e.utt_id + "': " + err.what());
    }
    const bool frames_ok =
        fh.shape.size() == 2 && fh.shape[0] == e.n_frames && fh.shape[1] == e.q_dim;
    require(frames_ok, Errc::kValidationError,
            "utterance '" + e.utt_id + "': stored frames have shape " + shape_string(fh.shape) +
                ", manifest declares (" + std::to_string(e.n_frames) + ", " +
                std::to_string(e.q_dim) + ")");
    const std::size_t ev = eh.shape.back();
    const bool emb_ok = (eh.shape.size() == 1 || eh.shape[0] == 1) && ev == e.v_dim;
    require(emb_ok, Errc::kValidationError,
            "utterance '" + e.utt_id + "': stored embedding has shape " +
                shape_string(eh.shape) + ", manifest declares (" + std::to_string(e.v_dim) +
                ",)");
  }
}

std::string dataset_fingerprint(const std::vector<ManifestEntry>& entries) {
  std::vector<const ManifestEntry*> sorted;
  sorted.reserve(entries.size());
  for (const auto& e : entries) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto* a, const auto* b) { return a->utt_id < b->utt_id; });
  std::uint64_t h = fnv1a64("eta-dataset-v1");
  for (const auto* e : sorted) {
    const std::string rec = e->utt_id + '\x1f' + std::to_string(e->n_frames) + '\x1f' +
                            std::to_string(e->q_dim) + '\x1f' + std::to_string(e->v_dim) + '\x1e';
    h = fnv1a64(rec, h);
  }
  std::ostringstream os;
  os << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

// ---------------------------------------------------------------------------
// Bundles

std::string bundle_timestamp(bool deterministic) {
  std::time_t t = 0;
  if (deterministic) {
    if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) {
      t = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
    }
  } else {
    t = std::time(nullptr);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void save_bundle(const ModelBundle& b, const fs::path& dir) {
  const auto& pca = b.pca;
  const auto& lat = b.latent;
  require(pca.p_dim() == lat.p_dim(), Errc::kShapeMismatch,
          "PCA has P=" + std::to_string(pca.p_dim()) + " but the latent basis has P=" +
              std::to_string(lat.p_dim()));
  require(lat.bias.size() == static_cast<Eigen::Index>(lat.q_dim()), Errc::kShapeMismatch,
          "latent bias length does not match basis columns");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(Errc::kIoError, dir.string() + ": " + ec.message());

  ordered_json meta;
  meta["schema_version"] = kBundleSchemaVersion;
  meta["Q"] = lat.q_dim();
  meta["V"] = pca.v_dim();
  meta["P"] = pca.p_dim();
  meta["L"] = lat.fit_meta.l_subsample;
  meta["rng_seed"] = lat.fit_meta.rng_seed;
  meta["solver"] = solver_name(lat.fit_meta.solver);
  meta["dataset_fingerprint"] = lat.fit_meta.dataset_fingerprint;
  meta["n_frames_used"] = lat.fit_meta.n_frames_used;
  meta["created_at"] = b.created_at;

  write_vector(dir / "pca_mean.npy", pca.mean, Precision::kF64);
  write_matrix(dir / "pca_components.npy", pca.components, Precision::kF64);
  write_vector(dir / "pca_explained_variance.npy", pca.explained_variance, Precision::kF64);
  write_matrix(dir / "latent_basis.npy", lat.basis, Precision::kF64);
  write_vector(dir / "latent_bias.npy", lat.bias, Precision::kF64);
  write_text_file(dir / "meta.json", meta.dump(2) + "\n");
}

namespace {

template <typename T>
T meta_field(const json& meta, const char* key, const fs::path& path) {
  if (!meta.contains(key)) fail(Errc::kMissingField, path.string() + ": missing '" + key + "'");
  try {
    return meta.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(Errc::kBadJson, path.string() + ": field '" + key + "': " + e.what());
  }
}

void expect_shape(const NpyArray& a, const std::vector<std::size_t>& want, const fs::path& path) {
  if (a.shape != want) {
    fail(Errc::kShapeMismatch, path.string() + ": shape " + shape_string(a.shape) +
                                   " does not match meta " + shape_string(want));
  }
}

}  // namespace

ModelBundle load_bundle(const fs::path& dir) {
  const fs::path meta_path = dir / "meta.json";
  json meta;
  try {
    meta = json::parse(read_text_file(meta_path));
  } catch (const json::parse_error& e) {
    fail(Errc::kBadJson, meta_path.string() + ": " + e.what());
  }
  const int version = meta_field<int>(meta, "schema_version", meta_path);
  if (version != kBundleSchemaVersion) {
    fail(Errc::kSchemaVersionMismatch, meta_path.string() + ": schema_version " +
                                           std::to_string(version) + ", expected " +
                                           std::to_string(kBundleSchemaVersion));
  }
  const auto q = meta_field<std::size_t>(meta, "Q", meta_path);
  const auto v = meta_field<std::size_t>(meta, "V", meta_path);
  const auto p = meta_field<std::size_t>(meta, "P", meta_path);

  ModelBundle b;
  b.created_at = meta_field<std::string>(meta, "created_at", meta_path);
  auto& fm = b.latent.fit_meta;
  fm.l_subsample = meta_field<std::size_t>(meta, "L", meta_path);
  fm.rng_seed = meta_field<std::uint64_t>(meta, "rng_seed", meta_path);
  fm.solver = parse_solver(meta_field<std::string>(meta, "solver", meta_path));
  fm.dataset_fingerprint = meta_field<std::string>(meta, "dataset_fingerprint", meta_path);
  fm.n_frames_used = meta_field<std::size_t>(meta, "n_frames_used", meta_path);

  const auto mean = read_array(dir / "pca_mean.npy");
  expect_shape(mean, {v}, dir / "pca_mean.npy");
  const auto comps = read_array(dir / "pca_components.npy");
  expect_shape(comps, {p, v}, dir / "pca_components.npy");
  const auto ev = read_array(dir / "pca_explained_variance.npy");
  expect_shape(ev, {p}, dir / "pca_explained_variance.npy");
  const auto basis = read_array(dir / "latent_basis.npy");
  expect_shape(basis, {p, q}, dir / "latent_basis.npy");
  const auto bias = read_array(dir / "latent_bias.npy");
  expect_shape(bias, {q}, dir / "latent_bias.npy");

  b.pca.mean = to_vector(mean);
  b.pca.components = to_matrix(comps);
  b.pca.explained_variance = to_vector(ev);
  b.latent.basis = to_matrix(basis);
  b.latent.bias = to_vector(bias);
  return b;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::kIoError, path.string() + ": cannot open for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) fail(Errc::kIoError, path.string() + ": write failed");
}

std::string read_text_file(const fs::path& path) {
  std::uintmax_t size = 0;
  auto in = open_in(path, &size);
  std::string s(size, '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(size))) {
    fail(Errc::kIoError, path.string() + ": read failed");
  }
  return s;
}

}  // namespace eta
