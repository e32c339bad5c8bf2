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

#include "facekit/netgraph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <type_traits>

#include "facekit/detail/rng.hpp"

namespace facekit {

std::string_view to_string(StemKind kind) {
  switch (kind) {
    case StemKind::NaiveV8: return "NaiveV8";
    case StemKind::RepV7: return "RepV7";
    case StemKind::RepV8: return "RepV8";
  }
  return "?";
}

std::string_view to_string(BottleneckKind kind) {
  switch (kind) {
    case BottleneckKind::V5Bot: return "V5Bot";
    case BottleneckKind::V8Bot: return "V8Bot";
    case BottleneckKind::RepV8Bot: return "RepV8Bot";
    case BottleneckKind::RepDWV8Bot: return "RepDWV8Bot";
  }
  return "?";
}

StemKind parse_stem_kind(std::string_view text) {
  for (StemKind k : {StemKind::NaiveV8, StemKind::RepV7, StemKind::RepV8})
    if (to_string(k) == text) return k;
  throw DomainError("unknown stem kind '" + std::string(text) + "'");
}

BottleneckKind parse_bottleneck_kind(std::string_view text) {
  for (BottleneckKind k : {BottleneckKind::V5Bot, BottleneckKind::V8Bot,
                           BottleneckKind::RepV8Bot, BottleneckKind::RepDWV8Bot})
    if (to_string(k) == text) return k;
  throw DomainError("unknown bottleneck kind '" + std::string(text) + "'");
}

void ModelConfig::validate() const {
  if (!(depth_multiple > 0.0)) throw DomainError("depth_multiple must be > 0");
  if (!(width_multiple > 0.0)) throw DomainError("width_multiple must be > 0");
  if (max_channels < 8) throw DomainError("max_channels must be >= 8");
  if (reg_max < 2) throw DomainError("reg_max must be >= 2");
  if (num_keypoints < 1) throw DomainError("num_keypoints must be >= 1");
  if (in_channels < 1) throw DomainError("in_channels must be >= 1");
  if (!(bn_epsilon > 0.0f)) throw DomainError("bn_epsilon must be > 0");
  // The topology produces exactly three pyramid levels at /8, /16, /32.
  if (strides != std::vector<int>{8, 16, 32})
    throw DomainError("strides must be 8,16,32 for this topology");
}

ModelConfig ModelConfig::tiny() { return ModelConfig{}; }

ModelConfig ModelConfig::small() {
  ModelConfig cfg;
  cfg.width_multiple = 0.50;
  return cfg;
}

namespace {

using Rng = detail::Rng;

ConvParamsF make_conv(Rng& rng, int cin, int cout, int k, int stride, int groups, bool bias) {
  ConvParamsF p;
  p.weight = Tensor4({cout, cin / groups, k, k});
  const double fan_in = static_cast<double>(cin / groups) * k * k;
  const double bound = std::sqrt(6.0 / fan_in);
  for (float& w : p.weight.data()) w = static_cast<float>(rng.uniform(-bound, bound));
  if (bias) p.bias.assign(cout, 0.0f);
  p.stride = stride;
  p.padding = k / 2;
  p.groups = groups;
  return p;
}

ConvLayer cbs(Rng& rng, const ModelConfig& cfg, int cin, int cout, int k, int stride = 1,
              int groups = 1) {
  ConvBnAct layer;
  layer.conv = make_conv(rng, cin, cout, k, stride, groups, false);
  layer.bn = BatchNormParamsF::identity(cout, cfg.bn_epsilon);
  return layer;
}

ConvLayer repconv(Rng& rng, const ModelConfig& cfg, int cin, int cout, int stride = 1,
                  int groups = 1) {
  RepBranchSet<float> set;
  set.branch3x3.conv = make_conv(rng, cin, cout, 3, stride, groups, false);
  set.branch3x3.bn = BatchNormParamsF::identity(cout, cfg.bn_epsilon);
  RepBranch<float> b1;
  b1.conv = make_conv(rng, cin, cout, 1, stride, groups, false);
  b1.bn = BatchNormParamsF::identity(cout, cfg.bn_epsilon);
  set.branch1x1 = std::move(b1);
  if (cin == cout && stride == 1) set.branch_id = BatchNormParamsF::identity(cout, cfg.bn_epsilon);
  return RepConvBlock{std::move(set)};
}

Bottleneck make_bottleneck(Rng& rng, const ModelConfig& cfg, int h, bool shortcut) {
  Bottleneck b;
  b.shortcut = shortcut;
  switch (cfg.bottleneck) {
    case BottleneckKind::V5Bot:
      b.first = cbs(rng, cfg, h, h, 1);
      b.second = cbs(rng, cfg, h, h, 3);
      break;
    case BottleneckKind::V8Bot:
      b.first = cbs(rng, cfg, h, h, 3);
      b.second = cbs(rng, cfg, h, h, 3);
      break;
    case BottleneckKind::RepV8Bot:
      b.first = repconv(rng, cfg, h, h);
      b.second = repconv(rng, cfg, h, h);
      break;
    case BottleneckKind::RepDWV8Bot:
      b.first = cbs(rng, cfg, h, h, 3);
      b.second = repconv(rng, cfg, h, h, 1, h);
      break;
  }
  return b;
}

C2fBlock make_c2f(Rng& rng, const ModelConfig& cfg, int cin, int cout, int n, bool shortcut) {
  C2fBlock b;
  b.hidden = cout / 2;
  b.expand = cbs(rng, cfg, cin, 2 * b.hidden, 1);
  for (int i = 0; i < n; ++i) b.bottlenecks.push_back(make_bottleneck(rng, cfg, b.hidden, shortcut));
  b.fuse = cbs(rng, cfg, (2 + n) * b.hidden, cout, 1);
  return b;
}

HeadBranch make_head_branch(Rng& rng, const ModelConfig& cfg, int cin, int hidden, int cout,
                            float bias) {
  HeadBranch b;
  b.first = cbs(rng, cfg, cin, hidden, 3);
  b.second = cbs(rng, cfg, hidden, hidden, 3);
  b.out = make_conv(rng, hidden, cout, 1, 1, 1, true);
  std::fill(b.out.bias.begin(), b.out.bias.end(), bias);
  return b;
}

// ---------------------------------------------------------------------------
// The graph is written once against an execution policy: Exec computes
// tensors, FlopCounter only propagates shapes and tallies multiply-adds.

struct Exec {
  using Act = Tensor4;

  Act layer(const ConvLayer& layer, const Act& x) const {
    return std::visit(
        [&x](const auto& l) -> Act {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, ConvBnAct>) {
            Act y = conv2d(x, l.conv);
            if (l.bn) y = batchnorm_infer(y, *l.bn);
            return l.act ? silu(y) : y;
          } else {
            if (const auto* set = std::get_if<RepBranchSet<float>>(&l.form))
              return silu(multi_branch_forward(x, *set));
            return silu(conv2d(x, std::get<FusedConv<float>>(l.form).conv));
          }
        },
        layer);
  }
  Act plain(const ConvParamsF& conv, const Act& x) const { return conv2d(x, conv); }
  Act maxpool(const Act& x, int k, int s, int p) const { return maxpool2d(x, k, s, p); }
  Act upsample(const Act& x) const { return upsample_nearest2x(x); }
  Act concat(const std::vector<Act>& parts) const {
    return concat_channels<float>(std::span<const Act>(parts));
  }
  std::pair<Act, Act> halves(const Act& x) const {
    const int sizes[] = {x.channels() / 2, x.channels() / 2};
    auto parts = split_channels(x, std::span<const int>(sizes));
    return {std::move(parts[0]), std::move(parts[1])};
  }
  Act add(const Act& a, const Act& b) const { return facekit::add(a, b); }
};

struct FlopCounter {
  using Act = Shape4;
  std::uint64_t flops = 0;

  Act conv(const ConvParamsF& c, const Act& x) {
    Act y{x.batch, c.out_channels(), conv_output_size(x.height, c.kernel(), c.stride, c.padding),
          conv_output_size(x.width, c.kernel(), c.stride, c.padding)};
    flops += 2ull * static_cast<std::uint64_t>(c.weight.channels()) * c.kernel() * c.kernel() *
             static_cast<std::uint64_t>(c.out_channels()) * y.height * y.width * x.batch;
    return y;
  }
  Act layer(const ConvLayer& layer, const Act& x) {
    if (const auto* l = std::get_if<ConvBnAct>(&layer)) return conv(l->conv, x);
    const auto& rep = std::get<RepConvBlock>(layer);
    if (const auto* set = std::get_if<RepBranchSet<float>>(&rep.form)) {
      Act y = conv(set->branch3x3.conv, x);
      if (set->branch1x1) conv(set->branch1x1->conv, x);
      return y;
    }
    return conv(std::get<FusedConv<float>>(rep.form).conv, x);
  }
  Act plain(const ConvParamsF& c, const Act& x) { return conv(c, x); }
  Act maxpool(const Act& x, int k, int s, int p) const {
    return {x.batch, x.channels, conv_output_size(x.height, k, s, p),
            conv_output_size(x.width, k, s, p)};
  }
  Act upsample(const Act& x) const { return {x.batch, x.channels, 2 * x.height, 2 * x.width}; }
  Act concat(const std::vector<Act>& parts) const {
    Act y = parts.front();
    y.channels = 0;
    for (const auto& p : parts) y.channels += p.channels;
    return y;
  }
  std::pair<Act, Act> halves(const Act& x) const {
    Act h = x;
    h.channels /= 2;
    return {h, h};
  }
  Act add(const Act& a, const Act&) const { return a; }
};

template <class P>
typename P::Act run_c2f(P& p, const C2fBlock& b, const typename P::Act& x) {
  using Act = typename P::Act;
  auto [a, last] = p.halves(p.layer(b.expand, x));
  std::vector<Act> parts{a, last};
  for (const auto& bot : b.bottlenecks) {
    Act y = p.layer(bot.second, p.layer(bot.first, last));
    last = bot.shortcut ? p.add(last, y) : y;
    parts.push_back(last);
  }
  return p.layer(b.fuse, p.concat(parts));
}

template <class P>
typename P::Act run_stem(P& p, const Stem& s, const typename P::Act& x) {
  auto y = p.layer(s.down1, x);
  if (s.kind == StemKind::RepV7) {
    auto pooled = p.maxpool(y, 2, 2, 0);
    auto conv = p.layer(s.down2, p.layer(*s.reduce, y));
    return p.concat({pooled, conv});
  }
  return p.layer(s.down2, y);
}

template <class P>
typename P::Act run_sppf(P& p, const SppfBlock& b, const typename P::Act& x) {
  auto y0 = p.layer(b.reduce, x);
  const int k = b.pool_kernel;
  auto y1 = p.maxpool(y0, k, 1, k / 2);
  auto y2 = p.maxpool(y1, k, 1, k / 2);
  auto y3 = p.maxpool(y2, k, 1, k / 2);
  return p.layer(b.fuse, p.concat({y0, y1, y2, y3}));
}

template <class P>
std::vector<std::array<typename P::Act, 3>> run_graph(P& p, const Model& m,
                                                      const typename P::Act& image) {
  using Act = typename P::Act;
  Act x = run_stem(p, m.stem, image);
  std::vector<Act> feats;
  for (const auto& stage : m.stages) {
    if (stage.down) x = p.layer(*stage.down, x);
    x = run_c2f(p, stage.block, x);
    feats.push_back(x);
  }
  const Act p5 = run_sppf(p, m.sppf, feats[3]);
  const Act t4 = run_c2f(p, m.neck.top_p4, p.concat({p.upsample(p5), feats[2]}));
  const Act t3 = run_c2f(p, m.neck.top_p3, p.concat({p.upsample(t4), feats[1]}));
  const Act b4 = run_c2f(p, m.neck.bottom_p4, p.concat({p.layer(m.neck.down_p3, t3), t4}));
  const Act b5 = run_c2f(p, m.neck.bottom_p5, p.concat({p.layer(m.neck.down_p4, b4), p5}));
  const Act levels[] = {t3, b4, b5};

  std::vector<std::array<Act, 3>> out;
  for (std::size_t i = 0; i < m.head.size(); ++i) {
    const HeadLevel& h = m.head[i];
    const Act& f = levels[i];
    auto branch = [&](const HeadBranch& b) {
      return p.plain(b.out, p.layer(b.second, p.layer(b.first, f)));
    };
    out.push_back({branch(h.box), branch(h.cls), branch(h.kpt)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tensor walker shared by weight I/O and parameter counting.

using Visitor = std::function<void(const std::string&, std::vector<int>, std::span<float>)>;

void visit_conv(const std::string& prefix, ConvParamsF& c, const Visitor& fn) {
  const Shape4 s = c.weight.shape();
  fn(prefix + ".weight", {s.batch, s.channels, s.height, s.width}, c.weight.data());
  if (c.has_bias()) fn(prefix + ".bias", {static_cast<int>(c.bias.size())}, std::span<float>(c.bias));
}

void visit_bn(const std::string& prefix, BatchNormParamsF& bn, const Visitor& fn) {
  const int n = bn.channels();
  fn(prefix + ".gamma", {n}, std::span<float>(bn.gamma));
  fn(prefix + ".beta", {n}, std::span<float>(bn.beta));
  fn(prefix + ".running_mean", {n}, std::span<float>(bn.running_mean));
  fn(prefix + ".running_var", {n}, std::span<float>(bn.running_var));
}

void visit_layer(const std::string& prefix, ConvLayer& layer, const Visitor& fn) {
  if (auto* l = std::get_if<ConvBnAct>(&layer)) {
    visit_conv(prefix + ".conv", l->conv, fn);
    if (l->bn) visit_bn(prefix + ".bn", *l->bn, fn);
    return;
  }
  auto& rep = std::get<RepConvBlock>(layer);
  if (auto* set = std::get_if<RepBranchSet<float>>(&rep.form)) {
    visit_conv(prefix + ".rep3.conv", set->branch3x3.conv, fn);
    visit_bn(prefix + ".rep3.bn", set->branch3x3.bn, fn);
    if (set->branch1x1) {
      visit_conv(prefix + ".rep1.conv", set->branch1x1->conv, fn);
      visit_bn(prefix + ".rep1.bn", set->branch1x1->bn, fn);
    }
    if (set->branch_id) visit_bn(prefix + ".repid.bn", *set->branch_id, fn);
  } else {
    visit_conv(prefix + ".fused", std::get<FusedConv<float>>(rep.form).conv, fn);
  }
}

void visit_c2f(const std::string& prefix, C2fBlock& b, const Visitor& fn) {
  visit_layer(prefix + ".expand", b.expand, fn);
  for (std::size_t i = 0; i < b.bottlenecks.size(); ++i) {
    const std::string p = prefix + ".m" + std::to_string(i);
    visit_layer(p + ".first", b.bottlenecks[i].first, fn);
    visit_layer(p + ".second", b.bottlenecks[i].second, fn);
  }
  visit_layer(prefix + ".fuse", b.fuse, fn);
}

void visit_model(Model& m, const Visitor& fn) {
  visit_layer("stem.down1", m.stem.down1, fn);
  if (m.stem.reduce) visit_layer("stem.reduce", *m.stem.reduce, fn);
  visit_layer("stem.down2", m.stem.down2, fn);
  for (std::size_t i = 0; i < m.stages.size(); ++i) {
    const std::string p = "backbone." + std::to_string(i);
    if (m.stages[i].down) visit_layer(p + ".down", *m.stages[i].down, fn);
    visit_c2f(p + ".c2f", m.stages[i].block, fn);
  }
  visit_layer("sppf.reduce", m.sppf.reduce, fn);
  visit_layer("sppf.fuse", m.sppf.fuse, fn);
  visit_c2f("neck.top_p4", m.neck.top_p4, fn);
  visit_c2f("neck.top_p3", m.neck.top_p3, fn);
  visit_layer("neck.down_p3", m.neck.down_p3, fn);
  visit_c2f("neck.bottom_p4", m.neck.bottom_p4, fn);
  visit_layer("neck.down_p4", m.neck.down_p4, fn);
  visit_c2f("neck.bottom_p5", m.neck.bottom_p5, fn);
  for (auto& level : m.head) {
    const std::string p = "head.p" + std::to_string(level.stride);
    for (auto [name, branch] : {std::pair{"box", &level.box}, std::pair{"cls", &level.cls},
                                std::pair{"kpt", &level.kpt}}) {
      const std::string bp = p + "." + name;
      visit_layer(bp + ".first", branch->first, fn);
      visit_layer(bp + ".second", branch->second, fn);
      visit_conv(bp + ".out", branch->out, fn);
    }
  }
}

template <class Fn>
void for_each_layer(Model& m, Fn&& fn) {
  fn(m.stem.down1);
  if (m.stem.reduce) fn(*m.stem.reduce);
  fn(m.stem.down2);
  auto c2f = [&fn](C2fBlock& b) {
    fn(b.expand);
    for (auto& bot : b.bottlenecks) {
      fn(bot.first);
      fn(bot.second);
    }
    fn(b.fuse);
  };
  for (auto& s : m.stages) {
    if (s.down) fn(*s.down);
    c2f(s.block);
  }
  fn(m.sppf.reduce);
  fn(m.sppf.fuse);
  c2f(m.neck.top_p4);
  c2f(m.neck.top_p3);
  fn(m.neck.down_p3);
  c2f(m.neck.bottom_p4);
  fn(m.neck.down_p4);
  c2f(m.neck.bottom_p5);
  for (auto& level : m.head) {
    for (HeadBranch* b : {&level.box, &level.cls, &level.kpt}) {
      fn(b->first);
      fn(b->second);
    }
  }
}

bool is_running_stat(const std::string& name) {
  auto ends_with = [&name](std::string_view suffix) {
    return name.size() >= suffix.size() &&
           name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  return ends_with(".running_mean") || ends_with(".running_var");
}

std::string dims_string(const std::vector<int>& dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) s += (i ? "," : "") + std::to_string(dims[i]);
  return s + "]";
}

}  // namespace

Model build_model(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  auto ch = [&cfg](int c) {
    const double scaled = std::min(c, cfg.max_channels) * cfg.width_multiple;
    return std::max(8, static_cast<int>(std::ceil(scaled / 8.0)) * 8);
  };
  auto depth = [&cfg](int n) {
    return std::max(1, static_cast<int>(std::lround(n * cfg.depth_multiple)));
  };
  const int c0 = ch(64), c1 = ch(128), c2 = ch(256), c3 = ch(512), c4 = ch(1024);

  Model m;
  m.config = cfg;
  m.stem.kind = cfg.stem;
  switch (cfg.stem) {
    case StemKind::NaiveV8:
      m.stem.down1 = cbs(rng, cfg, cfg.in_channels, c0, 3, 2);
      m.stem.down2 = cbs(rng, cfg, c0, c1, 3, 2);
      break;
    case StemKind::RepV8:
      m.stem.down1 = repconv(rng, cfg, cfg.in_channels, c0, 2);
      m.stem.down2 = repconv(rng, cfg, c0, c1, 2);
      break;
    case StemKind::RepV7:
      m.stem.down1 = repconv(rng, cfg, cfg.in_channels, c0, 2);
      m.stem.reduce = cbs(rng, cfg, c0, c0, 1);
      m.stem.down2 = repconv(rng, cfg, c0, c1 - c0, 2);
      break;
  }

  m.stages.push_back({std::nullopt, make_c2f(rng, cfg, c1, c1, depth(3), true)});
  m.stages.push_back({cbs(rng, cfg, c1, c2, 3, 2), make_c2f(rng, cfg, c2, c2, depth(6), true)});
  m.stages.push_back({cbs(rng, cfg, c2, c3, 3, 2), make_c2f(rng, cfg, c3, c3, depth(6), true)});
  m.stages.push_back({cbs(rng, cfg, c3, c4, 3, 2), make_c2f(rng, cfg, c4, c4, depth(3), true)});

  m.sppf.reduce = cbs(rng, cfg, c4, c4 / 2, 1);
  m.sppf.fuse = cbs(rng, cfg, 2 * c4, c4, 1);

  const int n = depth(3);
  m.neck.top_p4 = make_c2f(rng, cfg, c4 + c3, c3, n, false);
  m.neck.top_p3 = make_c2f(rng, cfg, c3 + c2, c2, n, false);
  m.neck.down_p3 = cbs(rng, cfg, c2, c2, 3, 2);
  m.neck.bottom_p4 = make_c2f(rng, cfg, c2 + c3, c3, n, false);
  m.neck.down_p4 = cbs(rng, cfg, c3, c3, 3, 2);
  m.neck.bottom_p5 = make_c2f(rng, cfg, c3 + c4, c4, n, false);

  // Branch widths follow the pose-head lineage: box max(16, c/4, 4*reg_max),
  // class max(c, 1), keypoints max(c/4, 3*K), with c the finest level's width.
  const int level_ch[] = {c2, c3, c4};
  const int box_hidden = std::max({16, c2 / 4, cfg.box_channels()});
  const int cls_hidden = std::max(c2, 1);
  const int kpt_hidden = std::max(c2 / 4, cfg.keypoint_channels());
  for (int i = 0; i < 3; ++i) {
    HeadLevel level;
    level.stride = cfg.strides[i];
    const double cells = 640.0 / level.stride;
    level.box = make_head_branch(rng, cfg, level_ch[i], box_hidden, cfg.box_channels(), 1.0f);
    level.cls = make_head_branch(rng, cfg, level_ch[i], cls_hidden, 1,
                                 static_cast<float>(std::log(5.0 / (cells * cells))));
    level.kpt = make_head_branch(rng, cfg, level_ch[i], kpt_hidden, cfg.keypoint_channels(), 0.0f);
    m.head.push_back(std::move(level));
  }
  return m;
}

HeadOutputs forward(const Model& model, const Tensor4& image) {
  const ModelConfig& cfg = model.config;
  if (image.channels() != cfg.in_channels)
    throw ShapeError("channels", "forward: image has " + std::to_string(image.channels()) +
                                     " channels, model expects " +
                                     std::to_string(cfg.in_channels));
  if (image.height() != image.width())
    throw ShapeError("width", "forward: image must be square, got " + to_string(image.shape()));
  const int max_stride = cfg.strides.back();
  if (image.height() % max_stride != 0)
    throw ShapeError("height", "forward: side " + std::to_string(image.height()) +
                                   " not divisible by stride " + std::to_string(max_stride));
  Exec exec;
  auto levels = run_graph(exec, model, image);
  HeadOutputs out;
  out.image_side = image.height();
  out.reg_max = cfg.reg_max;
  out.num_keypoints = cfg.num_keypoints;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    out.scales.push_back({cfg.strides[i], std::move(levels[i][0]), std::move(levels[i][1]),
                          std::move(levels[i][2])});
  }
  return out;
}

Model deploy(const Model& model) {
  Model out = model;
  for_each_layer(out, [](ConvLayer& layer) {
    if (auto* rep = std::get_if<RepConvBlock>(&layer)) {
      if (const auto* set = std::get_if<RepBranchSet<float>>(&rep->form))
        rep->form = fuse_repconv(*set);
    }
  });
  return out;
}

int rep_block_count(const Model& model) {
  int n = 0;
  for_each_layer(const_cast<Model&>(model), [&n](ConvLayer& layer) {
    if (std::holds_alternative<RepConvBlock>(layer)) ++n;
  });
  return n;
}

int unfused_rep_block_count(const Model& model) {
  int n = 0;
  for_each_layer(const_cast<Model&>(model), [&n](ConvLayer& layer) {
    if (const auto* rep = std::get_if<RepConvBlock>(&layer); rep && !rep->fused()) ++n;
  });
  return n;
}

std::uint64_t count_params(const Model& model) {
  std::uint64_t n = 0;
  visit_model(const_cast<Model&>(model),
              [&n](const std::string& name, std::vector<int>, std::span<float> data) {
                if (!is_running_stat(name)) n += data.size();
              });
  return n;
}

std::uint64_t count_flops(const Model& model, int input_side) {
  FlopCounter counter;
  run_graph(counter, model, Shape4{1, model.config.in_channels, input_side, input_side});
  return counter.flops;
}

void randomize_batchnorm(Model& model, std::uint64_t seed) {
  Rng rng(seed);
  visit_model(model, [&rng](const std::string& name, std::vector<int>, std::span<float> d) {
    auto ends_with = [&name](std::string_view suffix) {
      return name.size() >= suffix.size() &&
             name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    double lo = 0.0, hi = 0.0;
    if (ends_with(".gamma")) {
      lo = 0.8;
      hi = 1.2;
    } else if (ends_with(".running_var")) {
      lo = 0.8;
      hi = 1.25;
    } else if (ends_with(".beta") || ends_with(".running_mean")) {
      lo = -0.1;
      hi = 0.1;
    } else {
      return;
    }
    for (float& v : d) v = static_cast<float>(rng.uniform(lo, hi));
  });
}

std::vector<NamedTensor> named_tensors(const Model& model) {
  std::vector<NamedTensor> out;
  visit_model(const_cast<Model&>(model),
              [&out](const std::string& name, std::vector<int> dims, std::span<float> data) {
                out.push_back({name, std::move(dims), {data.begin(), data.end()}});
              });
  return out;
}

void assign_tensors(Model& model, std::span<const NamedTensor> tensors) {
  struct Slot {
    std::vector<int> dims;
    std::span<float> data;
  };
  std::map<std::string, Slot> slots;
  visit_model(model, [&slots](const std::string& name, std::vector<int> dims, std::span<float> d) {
    slots[name] = Slot{std::move(dims), d};
  });

  std::map<std::string, const NamedTensor*> given;
  for (const auto& t : tensors) {
    if (!given.emplace(t.name, &t).second)
      throw ShapeError(t.name, "duplicate tensor '" + t.name + "'");
  }
  std::string missing, extra;
  for (const auto& [name, slot] : slots)
    if (!given.count(name)) missing += (missing.empty() ? "" : ", ") + name;
  for (const auto& [name, t] : given)
    if (!slots.count(name)) extra += (extra.empty() ? "" : ", ") + name;
  if (!missing.empty() || !extra.empty()) {
    std::string msg = "tensor set does not match model;";
    if (!missing.empty()) msg += " missing: " + missing + ";";
    if (!extra.empty()) msg += " unexpected: " + extra + ";";
    throw ShapeError("tensors", msg);
  }
  for (const auto& [name, t] : given) {
    const Slot& slot = slots.at(name);
    if (t->dims != slot.dims)
      throw ShapeError(name, "tensor '" + name + "' has shape " + dims_string(t->dims) +
                                 ", model expects " + dims_string(slot.dims));
    if (t->values.size() != slot.data.size())
      throw ShapeError(name, "tensor '" + name + "' payload length mismatch");
  }
  for (const auto& [name, t] : given) std::copy(t->values.begin(), t->values.end(), slots.at(name).data.begin());
}

}  // namespace facekit
