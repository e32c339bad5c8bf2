// Copyright 2026 The FaceKit Authors
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

#include "facekit/dataio.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace facekit {

bool operator==(const Point2& a, const Point2& b) { return a.x == b.x && a.y == b.y; }

bool operator==(const Box& a, const Box& b) {
  return a.cx == b.cx && a.cy == b.cy && a.w == b.w && a.h == b.h;
}

bool operator==(const AnnotatedFace& a, const AnnotatedFace& b) {
  return a.class_id == b.class_id && a.box == b.box && a.keypoints == b.keypoints &&
         a.visibility == b.visibility && a.angles == b.angles;
}

bool operator==(const AnnotationRecord& a, const AnnotationRecord& b) {
  return a.image_id == b.image_id && a.width == b.width && a.height == b.height &&
         a.faces == b.faces;
}

bool operator==(const PredictedFace& a, const PredictedFace& b) {
  return a.class_id == b.class_id && a.box == b.box && a.conf == b.conf &&
         a.keypoints == b.keypoints && a.kconf == b.kconf && a.angles == b.angles;
}

bool operator==(const PredictionRecord& a, const PredictionRecord& b) {
  return a.image_id == b.image_id && a.width == b.width && a.height == b.height &&
         a.faces == b.faces;
}

FaceTarget to_pixels(const AnnotatedFace& face, int width, int height) {
  FaceTarget t;
  t.box = {face.box.cx * width, face.box.cy * height, face.box.w * width, face.box.h * height};
  for (const Point2& p : face.keypoints) t.keypoints.push_back({p.x * width, p.y * height});
  t.visibility = face.visibility;
  return t;
}

FaceDetection to_pixels(const PredictedFace& face, int width, int height) {
  FaceDetection d;
  d.cx = face.box.cx * width;
  d.cy = face.box.cy * height;
  d.w = face.box.w * width;
  d.h = face.box.h * height;
  d.conf = face.conf;
  for (std::size_t k = 0; k < face.keypoints.size(); ++k)
    d.landmarks.push_back({face.keypoints[k].x * width, face.keypoints[k].y * height,
                           k < face.kconf.size() ? face.kconf[k] : 0.0});
  return d;
}

PredictedFace from_pixels(const FaceDetection& det, int width, int height) {
  PredictedFace f;
  f.box = {det.cx / width, det.cy / height, det.w / width, det.h / height};
  f.conf = det.conf;
  for (const Landmark& l : det.landmarks) {
    f.keypoints.push_back({l.x / width, l.y / height});
    f.kconf.push_back(l.conf);
  }
  return f;
}

namespace {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

double parse_double(const Token& t, std::size_t line) {
  double v = 0.0;
  const char* b = t.text.data();
  const char* e = b + t.text.size();
  if (!t.text.empty() && *b == '+') ++b;
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || !std::isfinite(v))
    throw FormatError("expected a finite number, got '" + std::string(t.text) + "'", line,
                      t.column);
  return v;
}

long parse_int(const Token& t, std::size_t line) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
  if (ec != std::errc() || ptr != t.text.data() + t.text.size())
    throw FormatError("expected an integer, got '" + std::string(t.text) + "'", line, t.column);
  return v;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Shared line reader for annotation and prediction files. `on_face` gets the
// tokens of every face line together with the current image record.
template <typename Record, typename OnFace>
std::vector<Record> parse_records(std::istream& in, OnFace on_face) {
  std::vector<Record> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::vector<Token> tok = tokenize(line);
    if (tok.empty() || tok[0].text[0] == '#') continue;
    if (tok[0].text == "image") {
      if (tok.size() != 4)
        throw FormatError("image header needs: image <id> <width> <height>", line_no,
                          tok.back().column);
      Record r;
      r.image_id = std::string(tok[1].text);
      const long w = parse_int(tok[2], line_no);
      const long h = parse_int(tok[3], line_no);
      if (w <= 0 || w > (1 << 20)) throw FormatError("bad image width", line_no, tok[2].column);
      if (h <= 0 || h > (1 << 20)) throw FormatError("bad image height", line_no, tok[3].column);
      r.width = static_cast<int>(w);
      r.height = static_cast<int>(h);
      out.push_back(std::move(r));
      continue;
    }
    if (out.empty()) throw FormatError("face line before any image header", line_no, 1);
    on_face(out.back(), tok, line_no);
  }
  if (in.bad()) throw IoError("read error");
  return out;
}

void check_unit(double v, const Token& t, std::size_t line, const char* what) {
  if (v < 0.0 || v > 1.0)
    throw FormatError(std::string(what) + " must lie in [0, 1]", line, t.column);
}

void check_positive(double v, const Token& t, std::size_t line, const char* what) {
  if (!(v > 0.0)) throw FormatError(std::string(what) + " must be > 0", line, t.column);
}

int parse_class(const Token& t, std::size_t line) {
  const long c = parse_int(t, line);
  if (c < 0 || c > 1'000'000) throw FormatError("class id out of range", line, t.column);
  return static_cast<int>(c);
}

constexpr std::size_t kAnnFields = 5 + 3 * kNumLandmarks;
constexpr std::size_t kPredFields = 6 + 3 * kNumLandmarks;

std::ifstream open_in(const std::filesystem::path& path, bool binary = false) {
  std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
  if (!f) throw IoError("cannot open '" + path.string() + "' for reading");
  return f;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  std::ofstream f(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  return f;
}

void finish(std::ofstream& f, const std::filesystem::path& path) {
  f.flush();
  if (!f) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace

std::vector<AnnotationRecord> parse_annotations(std::istream& in) {
  return parse_records<AnnotationRecord>(
      in, [](AnnotationRecord& rec, const std::vector<Token>& tok, std::size_t ln) {
        if (tok.size() != kAnnFields && tok.size() != kAnnFields + 3)
          throw FormatError("face line has " + std::to_string(tok.size()) + " fields, expected " +
                                std::to_string(kAnnFields) + " or " +
                                std::to_string(kAnnFields + 3),
                            ln, tok[std::min(tok.size(), kAnnFields) - 1].column);
        AnnotatedFace f;
        f.class_id = parse_class(tok[0], ln);
        double b[4];
        for (int i = 0; i < 4; ++i) {
          b[i] = parse_double(tok[1 + i], ln);
          check_unit(b[i], tok[1 + i], ln, "normalized box value");
        }
        check_positive(b[2], tok[3], ln, "box width");
        check_positive(b[3], tok[4], ln, "box height");
        f.box = {b[0], b[1], b[2], b[3]};
        for (int k = 0; k < kNumLandmarks; ++k) {
          const Token& tx = tok[5 + 3 * k];
          const Token& ty = tok[6 + 3 * k];
          const Token& tv = tok[7 + 3 * k];
          const double x = parse_double(tx, ln), y = parse_double(ty, ln);
          check_unit(x, tx, ln, "normalized keypoint x");
          check_unit(y, ty, ln, "normalized keypoint y");
          const long v = parse_int(tv, ln);
          if (v < 0 || v > 2) throw FormatError("visibility must be 0, 1 or 2", ln, tv.column);
          f.keypoints.push_back({x, y});
          f.visibility.push_back(static_cast<int>(v));
        }
        if (tok.size() == kAnnFields + 3)
          f.angles = Angles{parse_double(tok[kAnnFields], ln), parse_double(tok[kAnnFields + 1], ln),
                            parse_double(tok[kAnnFields + 2], ln)};
        rec.faces.push_back(std::move(f));
      });
}

std::vector<AnnotationRecord> parse_annotations(const std::string& text) {
  std::istringstream in(text);
  return parse_annotations(in);
}

std::vector<AnnotationRecord> read_annotations(const std::filesystem::path& path) {
  std::ifstream f = open_in(path);
  try {
    return parse_annotations(f);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<AnnotationRecord> read_annotation_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("'" + dir.string() + "' is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<AnnotationRecord> out;
  for (const auto& p : files) {
    auto recs = read_annotations(p);
    out.insert(out.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
  }
  return out;
}

void write_annotations(std::ostream& out, const std::vector<AnnotationRecord>& records) {
  for (const AnnotationRecord& r : records) {
    out << "image " << r.image_id << ' ' << r.width << ' ' << r.height << '\n';
    for (const AnnotatedFace& f : r.faces) {
      if (f.keypoints.size() != kNumLandmarks || f.visibility.size() != kNumLandmarks)
        throw ShapeError("keypoints", "annotation faces must carry 68 keypoints");
      out << f.class_id << ' ' << fmt(f.box.cx) << ' ' << fmt(f.box.cy) << ' ' << fmt(f.box.w)
          << ' ' << fmt(f.box.h);
      for (int k = 0; k < kNumLandmarks; ++k)
        out << ' ' << fmt(f.keypoints[k].x) << ' ' << fmt(f.keypoints[k].y) << ' '
            << f.visibility[k];
      if (f.angles)
        out << ' ' << fmt(f.angles->yaw) << ' ' << fmt(f.angles->pitch) << ' '
            << fmt(f.angles->roll);
      out << '\n';
    }
  }
}

std::string format_annotations(const std::vector<AnnotationRecord>& records) {
  std::ostringstream s;
  write_annotations(s, records);
  return s.str();
}

void save_annotations(const std::filesystem::path& path,
                      const std::vector<AnnotationRecord>& records) {
  write_text_file(path, format_annotations(records));
}

std::vector<PredictionRecord> parse_predictions(std::istream& in) {
  return parse_records<PredictionRecord>(
      in, [](PredictionRecord& rec, const std::vector<Token>& tok, std::size_t ln) {
        if (tok.size() != kPredFields && tok.size() != kPredFields + 3)
          throw FormatError("prediction line has " + std::to_string(tok.size()) +
                                " fields, expected " + std::to_string(kPredFields) + " or " +
                                std::to_string(kPredFields + 3),
                            ln, tok[std::min(tok.size(), kPredFields) - 1].column);
        PredictedFace f;
        f.class_id = parse_class(tok[0], ln);
        double b[4];
        for (int i = 0; i < 4; ++i) b[i] = parse_double(tok[1 + i], ln);
        check_positive(b[2], tok[3], ln, "box width");
        check_positive(b[3], tok[4], ln, "box height");
        f.box = {b[0], b[1], b[2], b[3]};
        f.conf = parse_double(tok[5], ln);
        check_unit(f.conf, tok[5], ln, "confidence");
        for (int k = 0; k < kNumLandmarks; ++k) {
          f.keypoints.push_back({parse_double(tok[6 + 3 * k], ln), parse_double(tok[7 + 3 * k], ln)});
          const double c = parse_double(tok[8 + 3 * k], ln);
          check_unit(c, tok[8 + 3 * k], ln, "keypoint confidence");
          f.kconf.push_back(c);
        }
        if (tok.size() == kPredFields + 3)
          f.angles = Angles{parse_double(tok[kPredFields], ln), parse_double(tok[kPredFields + 1], ln),
                            parse_double(tok[kPredFields + 2], ln)};
        rec.faces.push_back(std::move(f));
      });
}

std::vector<PredictionRecord> parse_predictions(const std::string& text) {
  std::istringstream in(text);
  return parse_predictions(in);
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  std::ifstream f = open_in(path);
  try {
    return parse_predictions(f);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_predictions(std::ostream& out, const std::vector<PredictionRecord>& records) {
  for (const PredictionRecord& r : records) {
    out << "image " << r.image_id << ' ' << r.width << ' ' << r.height << '\n';
    for (const PredictedFace& f : r.faces) {
      if (f.keypoints.size() != kNumLandmarks || f.kconf.size() != kNumLandmarks)
        throw ShapeError("keypoints", "predicted faces must carry 68 keypoints");
      out << f.class_id << ' ' << fmt(f.box.cx) << ' ' << fmt(f.box.cy) << ' ' << fmt(f.box.w)
          << ' ' << fmt(f.box.h) << ' ' << fmt(f.conf);
      for (int k = 0; k < kNumLandmarks; ++k)
        out << ' ' << fmt(f.keypoints[k].x) << ' ' << fmt(f.keypoints[k].y) << ' '
            << fmt(f.kconf[k]);
      if (f.angles)
        out << ' ' << fmt(f.angles->yaw) << ' ' << fmt(f.angles->pitch) << ' '
            << fmt(f.angles->roll);
      out << '\n';
    }
  }
}

std::string format_predictions(const std::vector<PredictionRecord>& records) {
  std::ostringstream s;
  write_predictions(s, records);
  return s.str();
}

void save_predictions(const std::filesystem::path& path,
                      const std::vector<PredictionRecord>& records) {
  write_text_file(path, format_predictions(records));
}

// ---------------------------------------------------------------------------
// Tensor files

namespace {

constexpr char kMagic[4] = {'F', 'K', 'M', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw FormatError(std::string("truncated payload while reading ") + what);
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

}  // namespace

void write_tensors(std::ostream& out, const std::vector<NamedTensor>& tensors) {
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const NamedTensor& t : tensors) {
    std::size_t numel = 1;
    for (int d : t.dims) {
      if (d < 0) throw ShapeError(t.name, "negative dimension in tensor '" + t.name + "'");
      numel *= static_cast<std::size_t>(d);
    }
    if (numel != t.values.size())
      throw ShapeError(t.name, "tensor '" + t.name + "' dims do not match its value count");
    put_u32(out, static_cast<std::uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
    for (int d : t.dims) put_u32(out, static_cast<std::uint32_t>(d));
    for (float v : t.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
}

std::vector<NamedTensor> read_tensors(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad magic");
  const std::uint32_t version = get_u32(in, "version");
  if (version != kVersion)
    throw FormatError("unsupported tensor file version " + std::to_string(version));
  const std::uint32_t count = get_u32(in, "tensor count");
  std::vector<NamedTensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    const std::uint32_t len = get_u32(in, "name length");
    if (len > 4096) throw FormatError("tensor name length " + std::to_string(len) + " too large");
    t.name.resize(len);
    if (!in.read(t.name.data(), len)) throw FormatError("truncated payload while reading name");
    const std::uint32_t rank = get_u32(in, "rank");
    if (rank > 8) throw FormatError("tensor '" + t.name + "' has rank " + std::to_string(rank));
    std::uint64_t numel = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      const std::uint32_t d = get_u32(in, "dims");
      if (d > (1u << 30)) throw FormatError("tensor '" + t.name + "' dimension too large");
      t.dims.push_back(static_cast<int>(d));
      numel *= d;
      if (numel > (std::uint64_t{1} << 32))
        throw FormatError("tensor '" + t.name + "' is too large");
    }
    t.values.resize(numel);
    for (std::uint64_t k = 0; k < numel; ++k)
      t.values[k] = std::bit_cast<float>(get_u32(in, ("values of '" + t.name + "'").c_str()));
    out.push_back(std::move(t));
  }
  return out;
}

void save_tensors(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors) {
  std::ostringstream buf(std::ios::binary);
  write_tensors(buf, tensors);
  std::ofstream f = open_out(path, true);
  const std::string bytes = buf.str();
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  finish(f, path);
}

std::vector<NamedTensor> load_tensors(const std::filesystem::path& path) {
  std::ifstream f = open_in(path, true);
  std::stringstream buf;
  buf << f.rdbuf();
  try {
    return read_tensors(buf);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_weights(const Model& model, const std::filesystem::path& path) {
  save_tensors(path, named_tensors(model));
}

Model load_weights(const std::filesystem::path& path, const ModelConfig& config) {
  const std::vector<NamedTensor> tensors = load_tensors(path);
  Model model = build_model(config, 0);
  const bool fused = std::any_of(tensors.begin(), tensors.end(), [](const NamedTensor& t) {
    return t.name.find(".fused.") != std::string::npos;
  });
  if (fused) model = deploy(model);
  assign_tensors(model, tensors);
  return model;
}

void save_image_tensor(const std::filesystem::path& path, const Tensor4& image) {
  const Shape4 s = image.shape();
  save_tensors(path, {{"image", {s.batch, s.channels, s.height, s.width}, image.vector()}});
}

Tensor4 load_image_tensor(const std::filesystem::path& path) {
  std::vector<NamedTensor> t = load_tensors(path);
  if (t.size() != 1 || t[0].name != "image")
    throw FormatError(path.string() + ": expected a single tensor named 'image'");
  const std::vector<int>& d = t[0].dims;
  Shape4 s;
  if (d.size() == 3) {
    s = {1, d[0], d[1], d[2]};
  } else if (d.size() == 4) {
    s = {d[0], d[1], d[2], d[3]};
  } else {
    throw ShapeError("rank", "image tensor must have rank 3 or 4");
  }
  return Tensor4(s, std::move(t[0].values));
}

// ---------------------------------------------------------------------------
// Text configuration files

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename Fn>
void for_each_content_line(const std::string& text, Fn fn) {
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    fn(line, n);
  }
}

}  // namespace

ModelConfig parse_model_config(const std::string& text) {
  ModelConfig cfg = ModelConfig::tiny();
  bool seen_other = false;
  for_each_content_line(text, [&](const std::string& line, std::size_t n) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("expected key = value", n, 1);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const std::size_t col = line.find_first_not_of(" \t", eq + 1) + 1;
    const Token tok{value, col};
    try {
      if (key == "base") {
        if (seen_other) throw FormatError("'base' must come before other keys", n, 1);
        if (value == "tiny") {
          cfg = ModelConfig::tiny();
        } else if (value == "small") {
          cfg = ModelConfig::small();
        } else {
          throw FormatError("unknown base '" + value + "'", n, col);
        }
        return;
      }
      seen_other = true;
      if (key == "stem") {
        cfg.stem = parse_stem_kind(value);
      } else if (key == "bottleneck") {
        cfg.bottleneck = parse_bottleneck_kind(value);
      } else if (key == "depth_multiple") {
        cfg.depth_multiple = parse_double(tok, n);
      } else if (key == "width_multiple") {
        cfg.width_multiple = parse_double(tok, n);
      } else if (key == "max_channels") {
        cfg.max_channels = static_cast<int>(parse_int(tok, n));
      } else if (key == "reg_max") {
        cfg.reg_max = static_cast<int>(parse_int(tok, n));
      } else if (key == "num_keypoints") {
        cfg.num_keypoints = static_cast<int>(parse_int(tok, n));
      } else if (key == "in_channels") {
        cfg.in_channels = static_cast<int>(parse_int(tok, n));
      } else if (key == "bn_epsilon") {
        cfg.bn_epsilon = static_cast<float>(parse_double(tok, n));
      } else if (key == "strides") {
        cfg.strides.clear();
        std::string v = value;
        std::replace(v.begin(), v.end(), ',', ' ');
        for (const Token& t : tokenize(v))
          cfg.strides.push_back(static_cast<int>(parse_int({t.text, col + t.column - 1}, n)));
      } else {
        throw FormatError("unknown key '" + key + "'", n, line.find_first_not_of(" \t") + 1);
      }
    } catch (const FormatError&) {
      throw;
    } catch (const Error& e) {
      throw FormatError(e.what(), n, col);
    }
  });
  cfg.validate();
  return cfg;
}

ModelConfig read_model_config(const std::filesystem::path& path) {
  try {
    return parse_model_config(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string format_model_config(const ModelConfig& c) {
  std::ostringstream s;
  char eps[32];
  std::snprintf(eps, sizeof eps, "%.9g", static_cast<double>(c.bn_epsilon));
  s << "stem = " << to_string(c.stem) << '\n'
    << "bottleneck = " << to_string(c.bottleneck) << '\n'
    << "depth_multiple = " << fmt(c.depth_multiple) << '\n'
    << "width_multiple = " << fmt(c.width_multiple) << '\n'
    << "max_channels = " << c.max_channels << '\n'
    << "reg_max = " << c.reg_max << '\n'
    << "num_keypoints = " << c.num_keypoints << '\n'
    << "strides = ";
  for (std::size_t i = 0; i < c.strides.size(); ++i) s << (i ? "," : "") << c.strides[i];
  s << '\n' << "in_channels = " << c.in_channels << '\n' << "bn_epsilon = " << eps << '\n';
  return s.str();
}

ModelConfig resolve_model_config(const std::string& name_or_path) {
  if (name_or_path == "tiny") return ModelConfig::tiny();
  if (name_or_path == "small") return ModelConfig::small();
  return read_model_config(name_or_path);
}

FaceModel3D parse_face_model(const std::string& text) {
  FaceModel3D model;
  bool in_map = false;
  std::vector<bool> mapped;
  for_each_content_line(text, [&](const std::string& line, std::size_t n) {
    const std::vector<Token> tok = tokenize(line);
    if (tok.size() == 1 && tok[0].text == "index_map") {
      if (in_map) throw FormatError("duplicate index_map block", n, tok[0].column);
      in_map = true;
      mapped.assign(model.points.size(), false);
      return;
    }
    if (!in_map) {
      if (tok.size() != 4) throw FormatError("expected: name x y z", n, tok.back().column);
      model.points.push_back({std::string(tok[0].text),
                              {parse_double(tok[1], n), parse_double(tok[2], n),
                               parse_double(tok[3], n)},
                              -1});
      return;
    }
    if (tok.size() != 2) throw FormatError("expected: name landmark_index", n, tok.back().column);
    auto it = std::find_if(model.points.begin(), model.points.end(),
                           [&](const ModelPoint& p) { return p.name == tok[0].text; });
    if (it == model.points.end())
      throw FormatError("index_map names unknown point '" + std::string(tok[0].text) + "'", n,
                        tok[0].column);
    const long idx = parse_int(tok[1], n);
    if (idx < 0 || idx >= kNumLandmarks)
      throw FormatError("landmark index outside [0, 68)", n, tok[1].column);
    it->landmark_index = static_cast<int>(idx);
    mapped[it - model.points.begin()] = true;
  });
  if (!in_map) throw FormatError("face model lacks an index_map block");
  for (std::size_t i = 0; i < model.points.size(); ++i)
    if (!mapped[i]) throw FormatError("point '" + model.points[i].name + "' has no landmark index");
  try {
    model.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("invalid face model: ") + e.what());
  }
  return model;
}

FaceModel3D read_face_model(const std::filesystem::path& path) {
  try {
    return parse_face_model(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string format_face_model(const FaceModel3D& model) {
  std::ostringstream s;
  for (const ModelPoint& p : model.points)
    s << p.name << ' ' << fmt(p.position.x) << ' ' << fmt(p.position.y) << ' '
      << fmt(p.position.z) << '\n';
  s << "index_map\n";
  for (const ModelPoint& p : model.points) s << p.name << ' ' << p.landmark_index << '\n';
  return s.str();
}

std::vector<Point3> parse_template68(const std::string& text) {
  std::vector<Point3> pts;
  for_each_content_line(text, [&](const std::string& line, std::size_t n) {
    const std::vector<Token> tok = tokenize(line);
    if (tok.size() != 3) throw FormatError("expected: x y z", n, tok.back().column);
    if (pts.size() == kNumLandmarks) throw FormatError("more than 68 template points", n, 1);
    pts.push_back({parse_double(tok[0], n), parse_double(tok[1], n), parse_double(tok[2], n)});
  });
  if (pts.size() != kNumLandmarks)
    throw FormatError("template has " + std::to_string(pts.size()) + " points, expected 68");
  return pts;
}

std::vector<Point3> read_template68(const std::filesystem::path& path) {
  try {
    return parse_template68(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string format_template68(const std::vector<Point3>& points) {
  std::ostringstream s;
  for (const Point3& p : points) s << fmt(p.x) << ' ' << fmt(p.y) << ' ' << fmt(p.z) << '\n';
  return s.str();
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f = open_in(path);
  std::stringstream buf;
  buf << f.rdbuf();
  if (f.bad()) throw IoError("read error on '" + path.string() + "'");
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f = open_out(path, true);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  finish(f, path);
}

}  // namespace facekit
