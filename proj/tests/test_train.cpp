#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

#include "support.hpp"
#include "ta3n/data/feature_file.hpp"
#include "ta3n/data/generator.hpp"
#include "ta3n/error.hpp"
#include "ta3n/train/param_file.hpp"
#include "ta3n/train/train.hpp"

using namespace ta3n;
using namespace ta3n::train;
using ad::Tensor;
using data::VideoSample;
using data::VideoSet;

namespace {

VideoSample indexed_video(std::size_t T, std::size_t D) {
  VideoSample v;
  v.id = "v";
  v.frames = Tensor({T, D});
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t d = 0; d < D; ++d) v.frames.at(t, d) = double(t);
  }
  v.label = 0;
  return v;
}

std::vector<double> frame_indices(const Tensor& sampled) {
  std::vector<double> idx;
  for (std::size_t k = 0; k < sampled.rows(); ++k) idx.push_back(sampled.at(k, 0));
  return idx;
}

model::ModelConfig small_model(model::TemporalKind kind, std::size_t K) {
  model::ModelConfig c;
  c.feature_dim = 6;
  c.frames = K;
  c.num_classes = 4;
  c.spatial_widths = {8};
  c.relation_widths = {8};
  c.domain_hidden = 8;
  c.temporal_kind = kind;
  return c;
}

// Videos whose length equals K, so training-mode frame sampling has a single choice per segment.
VideoSet short_videos(std::size_t n, std::size_t K, std::size_t D, data::Domain domain, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  VideoSet out;
  for (std::size_t i = 0; i < n; ++i) {
    VideoSample v;
    v.id = "s" + std::to_string(seed) + "-" + std::to_string(i);
    v.frames = Tensor({K, D});
    for (double& x : v.frames.values()) x = g(rng) + (domain == data::Domain::Target ? 0.5 : 0.0);
    v.label = int(i % 4);
    v.domain = domain;
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<const VideoSample*> pointers(const VideoSet& set) {
  std::vector<const VideoSample*> p;
  for (const auto& v : set) p.push_back(&v);
  return p;
}

bool identical(const model::ModelParams& a, const model::ModelParams& b, const std::string& skip_prefix = "") {
  for (const auto& [name, t] : a.tensors()) {
    if (!skip_prefix.empty() && name.rfind(skip_prefix, 0) == 0) continue;
    if (!b.contains(name)) return false;
    const auto& u = b.at(name);
    if (t.shape() != u.shape()) return false;
    if (std::memcmp(t.values().data(), u.values().data(), t.size() * sizeof(double)) != 0) return false;
  }
  return true;
}

double max_abs_diff(const model::ModelParams& a, const model::ModelParams& b) {
  double m = 0.0;
  for (const auto& [name, t] : a.tensors()) {
    const auto& u = b.at(name);
    for (std::size_t i = 0; i < t.size(); ++i) m = std::max(m, std::abs(t[i] - u[i]));
  }
  return m;
}

double source_loss(model::ModelParams& params, const model::ModelConfig& c, std::span<const VideoSample* const> batch) {
  Rng rng(1);
  const Tensor frames = stack_frames(batch, c.frames, model::Mode::Train, rng);
  ad::Tape tape;
  const auto out = model::forward(tape, frames, c, params, {}, rng);
  losses::BatchTargets targets;
  for (const auto* v : batch) {
    targets.labels.push_back(*v->label);
    targets.domains.push_back(0);
  }
  return losses::build_objective(out, targets, c).breakdown.L_y;
}

// Accuracy of the video-level discriminator at telling the two sets apart.
double td_accuracy(model::ModelParams& params, const model::ModelConfig& c, const VideoSet& source,
                   const VideoSet& target) {
  std::size_t correct = 0, total = 0;
  for (const VideoSet* set : {&source, &target}) {
    const int want = set == &source ? 0 : 1;
    const auto ptrs = pointers(*set);
    Rng rng(1);
    const Tensor frames = stack_frames(ptrs, c.frames, model::Mode::Eval, rng);
    ad::Tape tape;
    model::ForwardOptions opts;
    opts.mode = model::Mode::Eval;
    const auto out = model::forward(tape, frames, c, params, opts, rng);
    const Tensor& d = out.video_domain_logits->value();
    for (std::size_t i = 0; i < d.rows(); ++i) {
      const int pred = d.at(i, 1) > d.at(i, 0) ? 1 : 0;
      correct += pred == want;
      ++total;
    }
  }
  return double(correct) / double(total);
}

}  // namespace

TEST_CASE("grl_ramp examples") {
  CHECK(grl_ramp(0.0, 10.0) == 0.0);
  CHECK(grl_ramp(1.0, 10.0) == doctest::Approx(0.9999).epsilon(1e-4));
  CHECK(grl_ramp(1.0, 10.0) == doctest::Approx(2.0 / (1.0 + std::exp(-10.0)) - 1.0).epsilon(1e-15));
  CHECK(grl_ramp(0.2, 10.0) < grl_ramp(0.8, 10.0));
  double prev = -1.0;
  for (int i = 0; i <= 100; ++i) {
    const double r = grl_ramp(i / 100.0, 10.0);
    CHECK(r >= prev);
    CHECK(r < 1.0);
    prev = r;
  }
  std::size_t clamps = 0;
  CHECK(grl_ramp(-0.5, 10.0, &clamps) == 0.0);
  CHECK(grl_ramp(1.5, 10.0, &clamps) == grl_ramp(1.0, 10.0));
  CHECK(clamps == 2);
  CHECK(grl_ramp(0.7, 0.0) == 0.0);
}

TEST_CASE("sample_frames examples") {
  Rng rng(1);
  CHECK(frame_indices(sample_frames(indexed_video(16, 2), 4, model::Mode::Eval, rng)) == std::vector<double>{2, 6, 10, 14});
  CHECK(frame_indices(sample_frames(indexed_video(5, 2), 5, model::Mode::Eval, rng)) == std::vector<double>{0, 1, 2, 3, 4});
  CHECK(frame_indices(sample_frames(indexed_video(5, 2), 5, model::Mode::Train, rng)) == std::vector<double>{0, 1, 2, 3, 4});
  CHECK(frame_indices(sample_frames(indexed_video(1, 2), 3, model::Mode::Eval, rng)) == std::vector<double>{0, 0, 0});
  CHECK(frame_indices(sample_frames(indexed_video(1, 2), 3, model::Mode::Train, rng)) == std::vector<double>{0, 0, 0});
  CHECK_THROWS_AS(sample_frames(indexed_video(16, 2), 1, model::Mode::Eval, rng), ConfigError);

  // Training picks stay inside their segments and cover each segment.
  std::vector<std::set<double>> seen(4);
  for (int i = 0; i < 400; ++i) {
    const auto idx = frame_indices(sample_frames(indexed_video(16, 1), 4, model::Mode::Train, rng));
    for (std::size_t k = 0; k < 4; ++k) {
      REQUIRE(idx[k] >= 4.0 * k);
      REQUIRE(idx[k] < 4.0 * (k + 1));
      seen[k].insert(idx[k]);
    }
  }
  for (const auto& s : seen) CHECK(s.size() == 4);
}

TEST_CASE("TrainConfig validation") {
  TrainConfig c;
  c.validate();
  c.epochs = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.clip_grad_norm = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("fit counting and empty data") {
  const auto mc = small_model(model::TemporalKind::Pooling, 3);
  const VideoSet src = short_videos(10, 3, 6, data::Domain::Source, 1);
  TrainConfig tc;
  tc.epochs = 1;
  tc.batch_size = 5;
  tc.regime = Regime::SourceOnly;
  const auto r = fit(tc, mc, src, {});
  REQUIRE(r.history.size() == 1);
  CHECK(r.history[0].steps == 2);
  CHECK(r.history[0].loss.n_source == 10);
  CHECK(r.history[0].progress == 1.0);

  tc.epochs = 3;
  tc.batch_size = 4;
  const auto r3 = fit(tc, mc, src, {});
  CHECK(r3.history.size() == 3);
  for (const auto& h : r3.history) CHECK(h.steps == 3);

  tc.epochs = 0;
  CHECK_THROWS_AS(fit(tc, mc, src, {}), ConfigError);
  tc.epochs = 1;
  CHECK_THROWS_AS(fit(tc, mc, {}, {}), DataError);

  auto adapt = mc;
  adapt.use_td = true;
  tc.regime = Regime::Adaptive;
  CHECK_THROWS_AS(fit(tc, adapt, src, {}), DataError);
}

TEST_CASE("effective_model_config") {
  auto c = small_model(model::TemporalKind::Relation, 4);
  c.use_sd = c.use_rd = c.use_td = c.use_attention = true;
  const auto so = effective_model_config(c, Regime::SourceOnly);
  CHECK(!(so.use_sd || so.use_rd || so.use_td || so.use_attention));
  CHECK(so.weights.gamma == 0.0);
  c.weights = {0.0, 0.0, 0.5, 0.3};
  const auto a = effective_model_config(c, Regime::Adaptive);
  CHECK(!a.use_sd);
  CHECK(!a.use_rd);
  CHECK(!a.use_attention);
  CHECK(a.use_td);
}

TEST_CASE("zero adaptation weights give the plain supervised update") {
  auto mc = small_model(model::TemporalKind::Relation, 4);
  mc.use_sd = mc.use_rd = mc.use_td = mc.use_attention = true;
  mc.weights = {0, 0, 0, 0};
  const VideoSet src = short_videos(3, 6, 6, data::Domain::Source, 2);
  const VideoSet tgt = short_videos(3, 6, 6, data::Domain::Target, 3);
  TrainConfig tc;

  const auto adaptive = effective_model_config(mc, Regime::Adaptive);
  const auto plain = effective_model_config(mc, Regime::SourceOnly);
  auto pa = model::init_params(adaptive, 1);
  auto pp = model::init_params(plain, 1);
  TrainState sa(4), sp(4);
  const auto s = pointers(src), t = pointers(tgt);
  for (int step = 0; step < 3; ++step) {
    train_step(s, t, adaptive, tc, pa, sa);
    train_step(s, {}, plain, tc, pp, sp);
  }
  CHECK(identical(pa, pp));
  CHECK(identical(pp, pa));
}

TEST_CASE("train_step: deterministic, and a small step descends") {
  auto mc = small_model(model::TemporalKind::Relation, 4);
  mc.use_td = true;
  mc.weights = {0, 0, 0.75, 0};
  const VideoSet src = short_videos(4, 8, 6, data::Domain::Source, 5);
  const VideoSet tgt = short_videos(4, 8, 6, data::Domain::Target, 6);
  const auto s = pointers(src), t = pointers(tgt);
  TrainConfig tc;
  auto p1 = model::init_params(mc, 2), p2 = model::init_params(mc, 2);
  TrainState s1(9), s2(9);
  s1.progress = s2.progress = 0.5;
  for (int i = 0; i < 2; ++i) {
    const auto b1 = train_step(s, t, mc, tc, p1, s1);
    const auto b2 = train_step(s, t, mc, tc, p2, s2);
    CHECK(std::memcmp(&b1.total, &b2.total, sizeof(double)) == 0);
    CHECK(b1.L_td == b2.L_td);
  }
  CHECK(identical(p1, p2));

  // Descent: pooling model on K-frame videos, so the batch is the same before and after.
  auto pm = small_model(model::TemporalKind::Pooling, 4);
  const VideoSet fixed = short_videos(4, 4, 6, data::Domain::Source, 7);
  const auto f = pointers(fixed);
  auto params = model::init_params(pm, 3);
  TrainConfig slow;
  slow.learning_rate = 1e-3;
  TrainState st(1);
  const double before = source_loss(params, pm, f);
  const auto br = train_step(f, {}, pm, slow, params, st);
  CHECK(br.L_y == doctest::Approx(before).epsilon(1e-12));
  const double after = source_loss(params, pm, f);
  CHECK(after <= before + 1e-6);
  CHECK(after < before);
}

TEST_CASE("updates do not depend on the order of videos within a batch") {
  auto mc = small_model(model::TemporalKind::Relation, 4);
  mc.use_sd = mc.use_td = true;
  mc.weights = {0.75, 0, 0.75, 0};
  const VideoSet src = short_videos(4, 4, 6, data::Domain::Source, 8);
  const VideoSet tgt = short_videos(4, 4, 6, data::Domain::Target, 9);
  auto s = pointers(src), t = pointers(tgt);
  auto rs = s, rt = t;
  std::reverse(rs.begin(), rs.end());
  std::rotate(rt.begin(), rt.begin() + 1, rt.end());
  TrainConfig tc;
  auto pa = model::init_params(mc, 4), pb = model::init_params(mc, 4);
  TrainState sa(2), sb(2);
  sa.progress = sb.progress = 0.3;
  train_step(s, t, mc, tc, pa, sa);
  train_step(rs, rt, mc, tc, pb, sb);
  CHECK(max_abs_diff(pa, pb) < 1e-13);
}

TEST_CASE("sgd_update: momentum, weight decay and clipping") {
  model::ModelParams p;
  p.tensors()["w"] = Tensor::vector({1.0, -2.0});
  TrainConfig tc;
  tc.learning_rate = 0.1;
  tc.momentum = 0.5;
  tc.weight_decay = 0.01;
  tc.clip_grad_norm = 0.0;
  TrainState st;
  auto& w = p.at("w");
  w.reset_grad();
  w.grad()[0] = 3.0;
  w.grad()[1] = 4.0;
  sgd_update(p, tc, st);
  // v = g + wd x; x -= lr v
  CHECK(w[0] == doctest::Approx(1.0 - 0.1 * (3.0 + 0.01)).epsilon(1e-15));
  CHECK(w[1] == doctest::Approx(-2.0 - 0.1 * (4.0 - 0.02)).epsilon(1e-15));
  const double v0 = 3.0 + 0.01, x0 = w[0];
  w.grad()[0] = 1.0;
  w.grad()[1] = 0.0;
  sgd_update(p, tc, st);
  CHECK(w[0] == doctest::Approx(x0 - 0.1 * (0.5 * v0 + 1.0 + 0.01 * x0)).epsilon(1e-15));
  for (double g : w.grad()) CHECK(g == 0.0);

  model::ModelParams q;
  q.tensors()["w"] = Tensor::vector({0.0, 0.0});
  TrainConfig clip;
  clip.learning_rate = 1.0;
  clip.momentum = 0.0;
  clip.weight_decay = 0.0;
  clip.clip_grad_norm = 1.0;
  TrainState sq;
  auto& u = q.at("w");
  u.reset_grad();
  u.grad()[0] = 3.0;
  u.grad()[1] = 4.0;
  sgd_update(q, clip, sq);
  CHECK(u[0] == doctest::Approx(-0.6).epsilon(1e-15));
  CHECK(u[1] == doctest::Approx(-0.8).epsilon(1e-15));
}

TEST_CASE("fit is deterministic and writes identical parameter files") {
  data::DatasetSpec ds;
  ds.videos_per_class_per_domain = 6;
  const auto d = data::generate_dataset(ds);
  model::ModelConfig mc;
  mc.use_sd = mc.use_rd = mc.use_td = mc.use_attention = true;
  TrainConfig tc;
  tc.epochs = 3;
  const auto a = fit(tc, mc, d.source, d.target, &d.target);
  const auto b = fit(tc, mc, d.source, d.target, &d.target);
  CHECK(identical(a.params, b.params));
  CHECK(train::encode_params(a.params) == train::encode_params(b.params));
  REQUIRE(a.history.size() == 3);
  for (std::size_t e = 0; e < 3; ++e) {
    CHECK(a.history[e].loss.total == b.history[e].loss.total);
    REQUIRE(a.history[e].eval);
    CHECK(a.history[e].eval->accuracy == b.history[e].eval->accuracy);
    CHECK(a.history[e].progress <= 1.0);
    if (e > 0) CHECK(a.history[e].progress >= a.history[e - 1].progress);
  }
  for (const auto& [name, t] : a.params.tensors()) CHECK(t.all_finite());

  tc.seed = 2;
  CHECK(!identical(a.params, fit(tc, mc, d.source, d.target).params));
}

TEST_CASE("TA3P round trip and errors") {
  model::ModelConfig mc;
  mc.use_td = true;
  const auto p = model::init_params(mc, 4);
  const auto dir = test::temp_dir("train_params");
  const std::string path = (dir / "m.ta3p").string();
  save_params(p, path);
  const auto back = load_params(path);
  CHECK(identical(p, back));
  CHECK(identical(back, p));
  model::check_params(mc, back);

  auto bytes = encode_params(p);
  using K = data::FeatureFileError::Kind;
  auto kind_of = [](const std::vector<std::uint8_t>& b) {
    try {
      decode_params(b);
    } catch (const data::FeatureFileError& e) {
      return e.kind();
    }
    FAIL("accepted a damaged TA3P buffer");
    return K::Malformed;
  };
  auto magic = bytes;
  magic[3] = 'F';
  CHECK(kind_of(magic) == K::BadMagic);
  auto version = bytes;
  version[4] = 9;
  CHECK(kind_of(version) == K::UnsupportedVersion);
  CHECK(kind_of(std::vector<std::uint8_t>(bytes.begin(), bytes.end() - 3)) == K::Truncated);
  auto trailing = bytes;
  trailing.push_back(1);
  CHECK(kind_of(trailing) == K::Malformed);
}

TEST_CASE("domain classifiers learn freely at GRL scale 0 and are confused under the ramp") {
  data::DatasetSpec ds;
  const auto d = data::generate_dataset(ds);
  // 80/20 split per domain for the held-out check.
  auto split = [](const VideoSet& all, bool train_part) {
    VideoSet out;
    for (std::size_t i = 0; i < all.size(); ++i) {
      if ((i % 5 != 4) == train_part) out.push_back(all[i]);
    }
    return out;
  };
  const VideoSet src_train = split(d.source, true), src_test = split(d.source, false);
  const VideoSet tgt_train = split(d.target, true), tgt_test = split(d.target, false);

  model::ModelConfig mc;
  mc.use_td = true;
  mc.weights = {0, 0, 1.0, 0};
  TrainConfig tc;

  TrainConfig frozen = tc;
  frozen.grl_gamma_ramp = 0.0;  // ramp stays 0: no reversal reaches the features
  auto free_fit = fit(frozen, mc, src_train, tgt_train);
  const double free_acc = td_accuracy(free_fit.params, mc, src_train, tgt_train);
  MESSAGE("domain accuracy without reversal " << free_acc);
  CHECK(free_acc >= 0.85);

  auto adv_fit = fit(tc, mc, src_train, tgt_train);
  const double held_out = td_accuracy(adv_fit.params, mc, src_test, tgt_test);
  MESSAGE("held-out domain accuracy under reversal " << held_out);
  CHECK(held_out <= 0.65);
}
