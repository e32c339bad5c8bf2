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

#include "commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "facekit/dataio.hpp"
#include "facekit/detail/parallel.hpp"
#include "facekit/detail/rng.hpp"
#include "facekit/metrics.hpp"
#include "facekit/netgraph.hpp"
#include "facekit/pose.hpp"
#include "facekit/postprocess.hpp"

namespace facekit::cli {

namespace {

Tensor4 random_image(int side, int channels, std::uint64_t seed) {
  detail::Rng rng(seed);
  Tensor4 t({1, channels, side, side});
  for (float& v : t.data()) v = static_cast<float>(rng.uniform());
  return t;
}

double max_head_deviation(const HeadOutputs& a, const HeadOutputs& b) {
  double m = 0.0;
  for (std::size_t s = 0; s < a.scales.size(); ++s) {
    m = std::max(m, static_cast<double>(max_abs_diff(a.scales[s].box_logits, b.scales[s].box_logits)));
    m = std::max(m, static_cast<double>(max_abs_diff(a.scales[s].face_logit, b.scales[s].face_logit)));
    m = std::max(m, static_cast<double>(max_abs_diff(a.scales[s].kpt_raw, b.scales[s].kpt_raw)));
  }
  return m;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void emit(std::ostream& out, const RunConfig& cfg,
          const std::vector<std::pair<std::string, std::string>>& rows) {
  if (cfg.report == "kv") {
    for (const auto& [k, v] : rows) out << k << '=' << v << '\n';
    return;
  }
  std::size_t w = 0;
  for (const auto& r : rows) w = std::max(w, r.first.size());
  for (const auto& [k, v] : rows) out << k << std::string(w + 2 - k.size(), ' ') << v << '\n';
}

Model load_or_build(const RunConfig& cfg, const ModelConfig& mc, std::ostream& err) {
  if (!cfg.weights.empty()) return load_weights(cfg.weights, mc);
  err << "facekit: no --weights given; using seeded random weights (seed " << cfg.seed << ")\n";
  Model m = build_model(mc, cfg.seed);
  randomize_batchnorm(m, cfg.seed + 1);
  return m;
}

FaceModel3D face_model(const RunConfig& cfg) {
  return cfg.model3d.empty() ? FaceModel3D::generic() : read_face_model(cfg.model3d);
}

std::optional<Angles> solve_angles(const FaceDetection& det, const FaceModel3D& model,
                                   const CameraIntrinsics& cam) {
  try {
    const HeadPose p = pose_from_detection(det, model, cam);
    return Angles{p.yaw, p.pitch, p.roll};
  } catch (const Error&) {
    return std::nullopt;
  }
}

bool is_tensor_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for reading");
  char magic[4] = {};
  f.read(magic, 4);
  return f.gcount() == 4 && std::memcmp(magic, "FKMT", 4) == 0;
}

std::vector<AnnotationRecord> read_gt(const std::string& path) {
  return std::filesystem::is_directory(path) ? read_annotation_dir(path) : read_annotations(path);
}

void write_or_print(const RunConfig& cfg, std::ostream& out, const std::string& text) {
  if (cfg.output.empty()) {
    out << text;
  } else {
    write_text_file(cfg.output, text);
  }
}

struct Stats {
  double mean = 0, median = 0, p95 = 0, min = 0;
};

Stats stats(std::vector<double> v) {
  Stats s;
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  s.median = v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
  s.p95 = v[std::min(v.size() - 1, static_cast<std::size_t>(std::ceil(0.95 * v.size())) - 1)];
  s.min = v.front();
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int cmd_fuse_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const ModelConfig mc = resolve_model_config(cfg.config);
  Model train = load_or_build(cfg, mc, err);
  if (unfused_rep_block_count(train) != rep_block_count(train))
    throw DomainError("fuse-check needs train-form weights");
  Model fused = deploy(train);
  if (cfg.perturb) {
    // Negative control: nudge one weight of the deployed graph.
    std::vector<NamedTensor> t = named_tensors(fused);
    t.front().values.front() += 0.5f;
    assign_tensors(fused, t);
  }
  double dev = 0.0;
  for (int i = 0; i < cfg.samples; ++i) {
    const Tensor4 x = random_image(cfg.imgsz, mc.in_channels, cfg.seed + 1000 + i);
    dev = std::max(dev, max_head_deviation(forward(train, x), forward(fused, x)));
  }
  const bool pass = dev <= cfg.tolerance;
  const int blocks = rep_block_count(train);
  emit(out, cfg,
       {{"rep_blocks", std::to_string(blocks)},
        {"fused_blocks", std::to_string(blocks - unfused_rep_block_count(fused))},
        {"params_train", std::to_string(count_params(train))},
        {"params_deployed", std::to_string(count_params(fused))},
        {"samples", std::to_string(cfg.samples)},
        {"max_deviation", fmt(dev)},
        {"tolerance", fmt(cfg.tolerance)},
        {"result", pass ? "PASS" : "FAIL"}});
  if (blocks == 0) out << (cfg.report == "kv" ? "note=0 fused blocks\n" : "note: 0 fused blocks\n");
  return pass ? kOk : kFailure;
}

int cmd_init(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  if (cfg.output.empty()) throw DomainError("init needs --out");
  const ModelConfig mc = resolve_model_config(cfg.config);
  Model m = build_model(mc, cfg.seed);
  randomize_batchnorm(m, cfg.seed + 1);
  if (cfg.deploy) m = deploy(m);
  save_weights(m, cfg.output);
  emit(out, cfg,
       {{"weights", cfg.output},
        {"form", cfg.deploy ? "deployed" : "train"},
        {"params", std::to_string(count_params(m))}});
  return kOk;
}

int cmd_infer(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.input.empty()) throw DomainError("infer needs --input");
  const FaceModel3D model3d = face_model(cfg);
  std::string mode = cfg.mode;
  if (mode == "auto") mode = is_tensor_file(cfg.input) ? "image" : "landmarks";

  std::vector<PredictionRecord> preds;
  std::size_t faces = 0;
  if (mode == "landmarks") {
    // Landmark mode: the annotated landmarks stand in for network output, so
    // the detection, pose and I/O stages run without images.
    for (const AnnotationRecord& rec : read_gt(cfg.input)) {
      PredictionRecord pr{rec.image_id, rec.width, rec.height, {}};
      const CameraIntrinsics cam = CameraIntrinsics::from_image(rec.width, rec.height);
      std::vector<FaceDetection> dets;
      for (const AnnotatedFace& f : rec.faces) {
        const FaceTarget t = to_pixels(f, rec.width, rec.height);
        FaceDetection d;
        d.cx = t.box.cx;
        d.cy = t.box.cy;
        d.w = t.box.w;
        d.h = t.box.h;
        d.conf = 1.0;
        for (std::size_t k = 0; k < t.keypoints.size(); ++k)
          d.landmarks.push_back({t.keypoints[k].x, t.keypoints[k].y, f.visibility[k] > 0 ? 1.0 : 0.0});
        if (d.conf > cfg.conf) dets.push_back(std::move(d));
      }
      for (const FaceDetection& d : nms(dets, cfg.iou)) {
        PredictedFace pf = from_pixels(d, rec.width, rec.height);
        pf.angles = solve_angles(d, model3d, cam);
        pr.faces.push_back(std::move(pf));
      }
      faces += pr.faces.size();
      preds.push_back(std::move(pr));
    }
  } else if (mode == "image") {
    const ModelConfig mc = resolve_model_config(cfg.config);
    const Model model = load_or_build(cfg, mc, err);
    const Tensor4 image = load_image_tensor(cfg.input);
    if (image.batch() != 1) throw ShapeError("batch", "infer takes one image per tensor file");
    if (image.channels() != mc.in_channels)
      throw ShapeError("channels", "image has " + std::to_string(image.channels()) +
                                       " channels, model expects " + std::to_string(mc.in_channels));
    const Letterbox lb = letterbox(image, cfg.imgsz);
    const HeadOutputs head = forward(model, lb.image);
    DecodeConfig dc;
    dc.conf_threshold = cfg.conf;
    dc.iou_threshold = cfg.iou;
    dc.reg_max = mc.reg_max;
    const std::vector<FaceDetection> kept = nms(decode_boxes(head, dc), dc.iou_threshold);
    const int w = image.width(), h = image.height();
    const CameraIntrinsics cam = CameraIntrinsics::from_image(w, h);
    PredictionRecord pr{std::filesystem::path(cfg.input).stem().string(), w, h, {}};
    for (const FaceDetection& d : kept) {
      const FaceDetection src = unletterbox(d, lb);
      if (!(src.w > 0.0) || !(src.h > 0.0)) continue;
      PredictedFace pf = from_pixels(src, w, h);
      pf.angles = solve_angles(src, model3d, cam);
      pr.faces.push_back(std::move(pf));
    }
    faces = pr.faces.size();
    preds.push_back(std::move(pr));
  } else {
    throw DomainError("unknown --mode '" + cfg.mode + "'");
  }

  const std::string text = format_predictions(preds);
  write_or_print(cfg, out, text);
  if (!cfg.output.empty())
    emit(err, cfg, {{"mode", mode}, {"images", std::to_string(preds.size())},
                    {"faces", std::to_string(faces)}, {"predictions", cfg.output}});
  return kOk;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  if (cfg.gt.empty() || cfg.pred.empty()) throw DomainError("eval needs --gt and --pred");
  EvalOptions opts;
  opts.exclude_outliers = cfg.exclude_outliers;
  if (cfg.normalizer == "bbox") {
    opts.normalizer = NmeNormalizer::BoxSize;
  } else if (cfg.normalizer != "eyes") {
    throw DomainError("unknown --normalizer '" + cfg.normalizer + "'");
  }
  const EvalReport rep = evaluate(read_gt(cfg.gt), read_predictions(cfg.pred), opts);
  write_or_print(cfg, out, cfg.report == "kv" ? format_report_kv(rep) : format_report_text(rep));
  return kOk;
}

int cmd_pose(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  if (cfg.gt.empty() || cfg.pred.empty()) throw DomainError("pose needs --gt and --pred");
  const FaceModel3D model3d = face_model(cfg);
  const std::vector<AnnotationRecord> gt = read_gt(cfg.gt);
  const std::vector<PredictionRecord> preds = read_predictions(cfg.pred);
  std::map<std::string, const PredictionRecord*> by_id;
  for (const PredictionRecord& p : preds) by_id[p.image_id] = &p;

  std::vector<Angles> pa, ga;
  int unsolved = 0;
  for (const AnnotationRecord& g : gt) {
    auto it = by_id.find(g.image_id);
    if (it == by_id.end()) continue;
    const PredictionRecord& p = *it->second;
    const CameraIntrinsics cam = CameraIntrinsics::from_image(p.width, p.height);
    std::vector<char> used(p.faces.size(), 0);
    for (const AnnotatedFace& gf : g.faces) {
      if (!gf.angles) continue;
      const FaceTarget t = to_pixels(gf, g.width, g.height);
      double best = 0.5;
      long match = -1;
      for (std::size_t k = 0; k < p.faces.size(); ++k) {
        if (used[k]) continue;
        const double v = box_iou(to_pixels(p.faces[k], p.width, p.height).box(), t.box);
        if (v >= best) {
          best = v;
          match = static_cast<long>(k);
        }
      }
      if (match < 0) continue;
      used[match] = 1;
      std::optional<Angles> a = p.faces[match].angles;
      if (!a) a = solve_angles(to_pixels(p.faces[match], p.width, p.height), model3d, cam);
      if (!a) {
        ++unsolved;
        continue;
      }
      pa.push_back(*a);
      ga.push_back(*gf.angles);
    }
  }
  const AmeResult r = ame(pa, ga);
  char buf[4][40];
  const char* f = cfg.report == "kv" ? "%.17g" : "%.6f";
  std::snprintf(buf[0], sizeof buf[0], f, r.yaw);
  std::snprintf(buf[1], sizeof buf[1], f, r.pitch);
  std::snprintf(buf[2], sizeof buf[2], f, r.roll);
  std::snprintf(buf[3], sizeof buf[3], f, r.mean);
  std::ostringstream s;
  emit(s, cfg,
       {{"pairs", std::to_string(r.count)},
        {"unsolved", std::to_string(unsolved)},
        {"ame_yaw", buf[0]},
        {"ame_pitch", buf[1]},
        {"ame_roll", buf[2]},
        {"ame_mean", buf[3]}});
  write_or_print(cfg, out, s.str());
  return kOk;
}

int cmd_synth(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  SceneSpec scene;
  scene.n_images = cfg.count;
  scene.image_width = scene.image_height = cfg.imgsz;
  scene.yaw = {-cfg.yaw_max, cfg.yaw_max};
  scene.pitch = {-cfg.pitch_max, cfg.pitch_max};
  scene.roll = {-cfg.roll_max, cfg.roll_max};
  scene.noise_sigma = cfg.sigma;
  scene.model = face_model(cfg);
  scene.seed = cfg.seed;
  const SyntheticDataset ds = generate_synthetic(scene);
  write_or_print(cfg, out, format_annotations(ds.annotations));
  if (!cfg.output.empty())
    emit(err, cfg, {{"images", std::to_string(ds.annotations.size())}, {"annotations", cfg.output}});
  return kOk;
}

int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const ModelConfig mc = resolve_model_config(cfg.config);
  Model model = load_or_build(cfg, mc, err);
  const bool has_rep = rep_block_count(model) > 0;
  const bool train_form = unfused_rep_block_count(model) > 0;
  std::optional<Model> fused;
  if (has_rep && train_form) fused = deploy(model);
  const Model& primary = fused && cfg.deploy ? *fused : model;

  DecodeConfig dc;
  dc.conf_threshold = cfg.conf;
  dc.iou_threshold = cfg.iou;
  dc.reg_max = mc.reg_max;
  const Tensor4 x = random_image(cfg.imgsz, mc.in_channels, cfg.seed + 7);

  for (int i = 0; i < cfg.warmup; ++i) {
    (void)forward(model, x);
    if (fused) (void)forward(*fused, x);
  }
  std::vector<double> fwd, post, fwd_train, fwd_fused;
  for (int i = 0; i < cfg.iterations; ++i) {
    auto t0 = std::chrono::steady_clock::now();
    const HeadOutputs h = forward(primary, x);
    fwd.push_back(seconds_since(t0));
    t0 = std::chrono::steady_clock::now();
    (void)nms(decode_boxes(h, dc), dc.iou_threshold);
    post.push_back(seconds_since(t0));
    if (fused) {
      // Interleave both forms so drift in machine load hits them equally.
      t0 = std::chrono::steady_clock::now();
      (void)forward(model, x);
      fwd_train.push_back(seconds_since(t0));
      t0 = std::chrono::steady_clock::now();
      (void)forward(*fused, x);
      fwd_fused.push_back(seconds_since(t0));
    }
  }
  const Stats f = stats(fwd), p = stats(post);
  std::vector<double> total(fwd.size());
  for (std::size_t i = 0; i < fwd.size(); ++i) total[i] = fwd[i] + post[i];
  const Stats t = stats(total);
  auto ms = [](double s) { return fmt(1e3 * s); };
  std::vector<std::pair<std::string, std::string>> rows{
      {"imgsz", std::to_string(cfg.imgsz)},
      {"batch", "1"},
      {"threads", std::to_string(detail::worker_count())},
      {"iterations", std::to_string(cfg.iterations)},
      {"form", primary.head.empty() || unfused_rep_block_count(primary) > 0 ? "train" : "deployed"},
      {"forward_ms_mean", ms(f.mean)},
      {"forward_ms_median", ms(f.median)},
      {"forward_ms_p95", ms(f.p95)},
      {"post_ms_mean", ms(p.mean)},
      {"post_ms_median", ms(p.median)},
      {"post_ms_p95", ms(p.p95)},
      {"total_ms_mean", ms(t.mean)},
      {"total_ms_median", ms(t.median)},
      {"total_ms_p95", ms(t.p95)}};
  if (fused) {
    const Stats a = stats(fwd_train), b = stats(fwd_fused);
    rows.push_back({"unfused_forward_ms_median", ms(a.median)});
    rows.push_back({"fused_forward_ms_median", ms(b.median)});
    rows.push_back({"fused_speedup_median", fmt(a.median / b.median)});
    rows.push_back({"fused_speedup_min", fmt(a.min / b.min)});
  }
  emit(out, cfg, rows);
  return kOk;
}

namespace {

void echo_config(const RunConfig& c, std::ostream& err) {
  err << "# facekit " << c.subcommand << " config=" << c.config << " weights="
      << (c.weights.empty() ? "<seeded>" : c.weights) << " conf=" << c.conf << " iou=" << c.iou
      << " imgsz=" << c.imgsz << " seed=" << c.seed << " report=" << c.report
      << " threads=" << detail::worker_count();
  if (!c.input.empty()) err << " input=" << c.input;
  if (!c.output.empty()) err << " out=" << c.output;
  if (!c.gt.empty()) err << " gt=" << c.gt;
  if (!c.pred.empty()) err << " pred=" << c.pred;
  if (!c.model3d.empty()) err << " model3d=" << c.model3d;
  if (c.subcommand == "fuse-check")
    err << " samples=" << c.samples << " tolerance=" << c.tolerance << " perturb=" << c.perturb;
  if (c.subcommand == "infer") err << " mode=" << c.mode;
  if (c.subcommand == "eval")
    err << " normalizer=" << c.normalizer << " exclude_outliers=" << c.exclude_outliers;
  if (c.subcommand == "synth")
    err << " n=" << c.count << " sigma=" << c.sigma << " yaw_max=" << c.yaw_max
        << " pitch_max=" << c.pitch_max << " roll_max=" << c.roll_max;
  if (c.subcommand == "bench")
    err << " iterations=" << c.iterations << " warmup=" << c.warmup << " deploy=" << c.deploy;
  err << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"facekit: face detection, landmarks and head pose toolkit"};
  app.require_subcommand(1, 1);

  auto common = [&cfg](CLI::App* sub) {
    sub->add_option("--weights", cfg.weights, "FKMT weights file");
    sub->add_option("--config", cfg.config, "tiny, small, or a key=value config file");
    sub->add_option("--conf", cfg.conf, "face confidence threshold")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--iou", cfg.iou, "NMS IoU threshold")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--imgsz", cfg.imgsz, "network input side")->check(CLI::Range(32, 8192));
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--report", cfg.report, "report format")
        ->check(CLI::IsMember({"text", "kv"}));
  };

  CLI::App* fuse = app.add_subcommand("fuse-check", "verify RepConv fusion on random inputs");
  common(fuse);
  fuse->add_option("--samples", cfg.samples, "random inputs")->check(CLI::PositiveNumber);
  fuse->add_option("--tolerance", cfg.tolerance, "max allowed deviation");
  fuse->add_flag("--perturb-fused", cfg.perturb, "negative control: corrupt one fused weight");

  CLI::App* init = app.add_subcommand("init", "write seeded weights");
  common(init);
  init->add_option("--out", cfg.output, "weights path")->required();
  init->add_flag("--deploy", cfg.deploy, "write the fused form");

  CLI::App* infer = app.add_subcommand("infer", "detect faces, landmarks and pose");
  common(infer);
  infer->add_option("--input", cfg.input, "image tensor file or annotation file")->required();
  infer->add_option("--out", cfg.output, "predictions path (default stdout)");
  infer->add_option("--mode", cfg.mode, "input kind")
      ->check(CLI::IsMember({"auto", "image", "landmarks"}));
  infer->add_option("--model3d", cfg.model3d, "3D face model file");

  CLI::App* eval = app.add_subcommand("eval", "score predictions against ground truth");
  common(eval);
  eval->add_option("--gt", cfg.gt, "annotation file or directory")->required();
  eval->add_option("--pred", cfg.pred, "predictions file")->required();
  eval->add_option("--out", cfg.output, "report path (default stdout)");
  eval->add_flag("--exclude-outliers", cfg.exclude_outliers, "drop matched faces with NME > 20");
  eval->add_option("--normalizer", cfg.normalizer, "NME normalizer")
      ->check(CLI::IsMember({"eyes", "bbox"}));

  CLI::App* pose = app.add_subcommand("pose", "head-pose AME of predictions");
  common(pose);
  pose->add_option("--gt", cfg.gt, "annotation file or directory")->required();
  pose->add_option("--pred", cfg.pred, "predictions file")->required();
  pose->add_option("--out", cfg.output, "report path (default stdout)");
  pose->add_option("--model3d", cfg.model3d, "3D face model file");

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic landmark dataset");
  common(synth);
  synth->add_option("--n", cfg.count, "images")->check(CLI::NonNegativeNumber);
  synth->add_option("--sigma", cfg.sigma, "landmark pixel noise")->check(CLI::NonNegativeNumber);
  synth->add_option("--yaw-max", cfg.yaw_max, "yaw range (+-degrees)");
  synth->add_option("--pitch-max", cfg.pitch_max, "pitch range (+-degrees)");
  synth->add_option("--roll-max", cfg.roll_max, "roll range (+-degrees)");
  synth->add_option("--out", cfg.output, "annotation path (default stdout)");
  synth->add_option("--model3d", cfg.model3d, "3D face model file");

  CLI::App* bench = app.add_subcommand("bench", "latency of forward and postprocess");
  common(bench);
  bench->add_option("--n", cfg.iterations, "timed iterations")->check(CLI::PositiveNumber);
  bench->add_option("--warmup", cfg.warmup, "untimed iterations")->check(CLI::NonNegativeNumber);
  bench->add_flag("--deploy", cfg.deploy, "time the fused form as the primary model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    app.exit(e, o, er);
    err << er.str() << o.str();
    return e.get_exit_code() == 0 ? kOk : kUsage;
  }
  for (CLI::App* sub : app.get_subcommands()) cfg.subcommand = sub->get_name();
  echo_config(cfg, err);

  try {
    if (cfg.subcommand == "fuse-check") return cmd_fuse_check(cfg, out, err);
    if (cfg.subcommand == "init") return cmd_init(cfg, out, err);
    if (cfg.subcommand == "infer") return cmd_infer(cfg, out, err);
    if (cfg.subcommand == "eval") return cmd_eval(cfg, out, err);
    if (cfg.subcommand == "pose") return cmd_pose(cfg, out, err);
    if (cfg.subcommand == "synth") return cmd_synth(cfg, out, err);
    if (cfg.subcommand == "bench") return cmd_bench(cfg, out, err);
  } catch (const IoError& e) {
    err << "facekit: " << e.what() << '\n';
    return kIo;
  } catch (const FormatError& e) {
    err << "facekit: " << e.what() << '\n';
    return kIo;
  } catch (const DomainError& e) {
    err << "facekit: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "facekit: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace facekit::cli
