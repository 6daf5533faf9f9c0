#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "support.hpp"
#include "ta3n/error.hpp"
#include "ta3n/losses/values.hpp"
#include "ta3n/model/model.hpp"

using namespace ta3n;
using namespace ta3n::model;
using ad::Tensor;
using ad::Var;

namespace {

Tensor random_frames(std::size_t B, std::size_t K, std::size_t D, std::uint64_t seed) {
  Tensor t({B, K, D});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double& x : t.values()) x = n(rng);
  return t;
}

void set_identity(Tensor& w) {
  for (double& x : w.values()) x = 0.0;
  for (std::size_t i = 0; i < std::min(w.dim(0), w.dim(1)); ++i) w.at(i, i) = 1.0;
}

void set_zero(Tensor& t) {
  for (double& x : t.values()) x = 0.0;
}

ModelConfig small_config(TemporalKind kind, std::size_t K = 3, std::size_t D = 3) {
  ModelConfig c;
  c.feature_dim = D;
  c.frames = K;
  c.num_classes = 3;
  c.spatial_widths = {D};
  c.relation_widths = {4};
  c.domain_hidden = 0;
  c.temporal_kind = kind;
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  ModelConfig c;
  c.validate();
  c.use_rd = true;
  c.temporal_kind = TemporalKind::Pooling;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ModelConfig{};
  c.use_attention = true;
  CHECK_THROWS_AS(c.validate(), ConfigError);  // attention without rd
  c = ModelConfig{};
  c.spatial_widths = {};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ModelConfig{};
  c.relation_widths = {8, 0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ModelConfig{};
  c.frames = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ModelConfig{};
  c.weights.gamma = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("spatial module examples") {
  ModelConfig c = small_config(TemporalKind::Pooling);
  ModelParams p = init_params(c, 1);
  const Tensor frames = random_frames(2, 3, 3, 4);

  SUBCASE("identity layer") {
    set_identity(p.at("spatial.0.weight"));
    set_zero(p.at("spatial.0.bias"));
    ad::Tape tape;
    Var out = spatial_module(tape, tape.constant(frames), c, p);
    for (std::size_t i = 0; i < frames.size(); ++i) CHECK(out.value()[i] == frames[i]);
  }
  SUBCASE("zero weights give the bias") {
    set_zero(p.at("spatial.0.weight"));
    auto& b = p.at("spatial.0.bias");
    b = Tensor::vector({0.5, -1, 2});
    ad::Tape tape;
    Var out = spatial_module(tape, tape.constant(frames), c, p);
    for (std::size_t r = 0; r < 6; ++r) test::check_close(out.value().values().subspan(r * 3, 3), b.values(), 0);
  }
  SUBCASE("frame permutation permutes outputs") {
    Tensor swapped = frames;
    for (std::size_t b = 0; b < 2; ++b) {
      for (std::size_t d = 0; d < 3; ++d) std::swap(swapped[(b * 3 + 0) * 3 + d], swapped[(b * 3 + 2) * 3 + d]);
    }
    ad::Tape tape;
    const Tensor a = spatial_module(tape, tape.constant(frames), c, p).value();
    const Tensor s = spatial_module(tape, tape.constant(swapped), c, p).value();
    for (std::size_t b = 0; b < 2; ++b) {
      for (std::size_t d = 0; d < 3; ++d) {
        CHECK(a[(b * 3 + 0) * 3 + d] == s[(b * 3 + 2) * 3 + d]);
        CHECK(a[(b * 3 + 1) * 3 + d] == s[(b * 3 + 1) * 3 + d]);
      }
    }
  }
  SUBCASE("width mismatch") {
    ad::Tape tape;
    CHECK_THROWS_AS(spatial_module(tape, tape.constant(random_frames(1, 3, 5, 1)), c, p), ShapeError);
  }
}

TEST_CASE("sample_ordered_tuples examples") {
  Rng rng(3);
  const auto only = sample_ordered_tuples(3, 3, 7, rng);
  REQUIRE(only.size() == 1);
  CHECK(only[0] == Tuple{0, 1, 2});

  const auto three = sample_ordered_tuples(5, 2, 3, rng);
  CHECK(three.size() == 3);
  CHECK(std::set<Tuple>(three.begin(), three.end()).size() == 3);
  for (const auto& t : three) CHECK(t[0] < t[1]);

  const auto all = sample_ordered_tuples(4, 2, 100, rng);
  std::set<Tuple> brute;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) brute.insert({i, j});
  }
  CHECK(all.size() == 6);
  CHECK(std::set<Tuple>(all.begin(), all.end()) == brute);

  CHECK_THROWS_AS(sample_ordered_tuples(3, 4, 1, rng), ConfigError);
  CHECK_THROWS_AS(sample_ordered_tuples(3, 2, 0, rng), ConfigError);
}

TEST_CASE("sample_ordered_tuples is deterministic and roughly uniform") {
  Rng a(9), b(9);
  CHECK(sample_ordered_tuples(6, 3, 4, a) == sample_ordered_tuples(6, 3, 4, b));

  Rng rng(1);
  std::map<Tuple, int> counts;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) counts[sample_ordered_tuples(5, 2, 1, rng)[0]]++;
  CHECK(counts.size() == 10);
  for (const auto& [t, n] : counts) CHECK(std::abs(n / double(draws) - 0.1) < 0.01);
}

TEST_CASE("eval-mode tuples: all when few, fixed sample when many") {
  ModelConfig c = small_config(TemporalKind::Relation, 8);
  Rng r1(1), r2(2);
  CHECK(tuples_for_scale(c, 2, Mode::Eval, r1).size() == 20);  // C(8,2)=28 > 20
  CHECK(tuples_for_scale(c, 7, Mode::Eval, r1).size() == 8);
  Rng r3(1), r4(99);
  CHECK(tuples_for_scale(c, 3, Mode::Eval, r3) == tuples_for_scale(c, 3, Mode::Eval, r4));
  CHECK(tuples_for_scale(c, 2, Mode::Train, r2).size() == c.tuples_per_scale);
}

TEST_CASE("relation_feature examples") {
  ModelConfig c = small_config(TemporalKind::Relation, 3, 2);
  c.relation_widths = {4};  // n * D_s = 4 for n = 2
  ModelParams p = init_params(c, 5);

  SUBCASE("identity MLP on a single tuple gives the concatenation") {
    set_identity(p.at("relation2.0.weight"));
    set_zero(p.at("relation2.0.bias"));
    const Tensor f = random_frames(2, 3, 2, 7);
    ad::Tape tape;
    const std::vector<Tuple> tuples{{0, 2}};
    const Tensor r = relation_feature(tape, tape.constant(f), 2, p, tuples).value();
    for (std::size_t b = 0; b < 2; ++b) {
      CHECK(r.at(b, 0) == f[(b * 3 + 0) * 2 + 0]);
      CHECK(r.at(b, 1) == f[(b * 3 + 0) * 2 + 1]);
      CHECK(r.at(b, 2) == f[(b * 3 + 2) * 2 + 0]);
      CHECK(r.at(b, 3) == f[(b * 3 + 2) * 2 + 1]);
    }
  }
  SUBCASE("identical frames give the single-tuple value") {
    Tensor f({1, 3, 2});
    for (std::size_t k = 0; k < 3; ++k) {
      f[k * 2] = 0.4;
      f[k * 2 + 1] = -1.3;
    }
    ad::Tape tape;
    const std::vector<Tuple> all{{0, 1}, {0, 2}, {1, 2}}, one{{1, 2}};
    const Tensor single = relation_feature(tape, tape.constant(f), 2, p, one).value();
    test::check_close(relation_feature(tape, tape.constant(f), 2, p, all).value(),
                      std::vector<double>(single.values().begin(), single.values().end()), 1e-15);
  }
  SUBCASE("hand-set one-layer MLP, all three pairs") {
    // W (4×4) and b chosen by hand; frames 1×3×2.
    auto& W = p.at("relation2.0.weight");
    W = Tensor::matrix({{1, 0, 2, 0}, {0, 1, 0, -1}, {1, 1, 0, 0}, {0, 0, 1, 3}});
    p.at("relation2.0.bias") = Tensor::vector({0.5, 0, 0, -1});
    Tensor f({1, 3, 2}, {1, 2, 3, 4, 5, 6});
    // Pair (i, j) input [f_i, f_j]; output_o = sum_k in_k W[k][o] + b_o.
    auto out = [&](std::size_t i, std::size_t j) {
      const double in[4] = {f[i * 2], f[i * 2 + 1], f[j * 2], f[j * 2 + 1]};
      std::vector<double> o{0.5, 0, 0, -1};
      for (std::size_t k = 0; k < 4; ++k) {
        for (std::size_t q = 0; q < 4; ++q) o[q] += in[k] * W.at(k, q);
      }
      return o;
    };
    std::vector<double> expected(4, 0.0);
    for (auto [i, j] : {std::pair<std::size_t, std::size_t>{0, 1}, {0, 2}, {1, 2}}) {
      const auto o = out(i, j);
      for (std::size_t q = 0; q < 4; ++q) expected[q] += o[q] / 3.0;
    }
    // Entry 0 by hand: pairs give 4.5, 6.5 and 8.5.
    CHECK(expected[0] == doctest::Approx((4.5 + 6.5 + 8.5) / 3.0));
    ad::Tape tape;
    const std::vector<Tuple> all{{0, 1}, {0, 2}, {1, 2}};
    test::check_close(relation_feature(tape, tape.constant(f), 2, p, all).value(), expected, 1e-12);
  }
  SUBCASE("missing scale MLP") {
    ad::Tape tape;
    const std::vector<Tuple> t{{0, 1, 2}};
    ModelParams empty;
    CHECK_THROWS_AS(relation_feature(tape, tape.constant(random_frames(1, 3, 2, 1)), 3, empty, t), ConfigError);
  }
}

TEST_CASE("relation at K=3, n=3 equals the single-tuple MLP output exactly") {
  ModelConfig c = small_config(TemporalKind::Relation, 3, 3);
  c.relation_widths = {5, 4};
  ModelParams p = init_params(c, 8);
  const Tensor f = random_frames(2, 3, 3, 2);
  ad::Tape tape;
  Rng rng(1);
  const auto tuples = tuples_for_scale(c, 3, Mode::Train, rng);
  const Tensor r = relation_feature(tape, tape.constant(f), 3, p, tuples).value();
  // Direct: reshape each video's frames to one row and apply the MLP.
  const Tensor rows = f.reshaped({2, 9});
  const Tensor direct = apply_mlp(tape, tape.constant(rows), p, "relation3").value();
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] == direct[i]);
}

TEST_CASE("temporal aggregate examples") {
  SUBCASE("pooling") {
    ModelConfig c = small_config(TemporalKind::Pooling, 2, 2);
    ModelParams p = init_params(c, 1);
    ad::Tape tape;
    Rng rng(1);
    auto out = temporal_aggregate(tape, tape.constant(Tensor({1, 2, 2}, {1, 2, 3, 4})), c, p, Mode::Eval, rng);
    test::check_close(out.video_feature.value(), {2, 3}, 0);
    CHECK(!out.relations);
  }
  SUBCASE("relation count is K-1") {
    for (std::size_t K = 2; K <= 8; ++K) {
      ModelConfig c = small_config(TemporalKind::Relation, K, 2);
      ModelParams p = init_params(c, K);
      ad::Tape tape;
      Rng rng(K);
      auto out = temporal_aggregate(tape, tape.constant(random_frames(2, K, 2, K)), c, p, Mode::Train, rng);
      REQUIRE(out.relations);
      CHECK(out.relations->size() == K - 1);
      for (const auto& [n, r] : *out.relations) CHECK(r.value().dim(1) == 4);
    }
  }
  SUBCASE("equal relation features sum to (K-1) r") {
    ModelConfig c = small_config(TemporalKind::Relation, 4, 2);
    ModelParams p = init_params(c, 3);
    for (std::size_t n = 2; n <= 4; ++n) {
      set_zero(p.at("relation" + std::to_string(n) + ".0.weight"));
      p.at("relation" + std::to_string(n) + ".0.bias") = Tensor::vector({1, -2, 0.5, 3});
    }
    ad::Tape tape;
    Rng rng(1);
    auto out = temporal_aggregate(tape, tape.constant(random_frames(1, 4, 2, 1)), c, p, Mode::Train, rng);
    test::check_close(out.video_feature.value(), {3, -6, 1.5, 9}, 1e-15);
  }
}

TEST_CASE("pooling with identity spatial module equals the raw frame mean exactly") {
  ModelConfig c = small_config(TemporalKind::Pooling, 5, 4);
  ModelParams p = init_params(c, 2);
  set_identity(p.at("spatial.0.weight"));
  set_zero(p.at("spatial.0.bias"));
  const Tensor f = random_frames(3, 5, 4, 12);
  ad::Tape tape;
  Rng rng(1);
  const auto out = forward(tape, f, c, p, {}, rng);
  ad::Tape t2;
  const Tensor mean = ad::mean_over_time(t2.constant(f)).value();
  for (std::size_t i = 0; i < mean.size(); ++i) CHECK(out.video_feature.value()[i] == mean[i]);
}

TEST_CASE("frame order sensitivity") {
  const Tensor f = random_frames(1, 4, 3, 5);
  Tensor rev({1, 4, 3});
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t d = 0; d < 3; ++d) rev[k * 3 + d] = f[(3 - k) * 3 + d];
  }
  ModelConfig pool = small_config(TemporalKind::Pooling, 4, 3);
  ModelParams pp = init_params(pool, 1);
  ModelConfig rel = small_config(TemporalKind::Relation, 4, 3);
  ModelParams rp = init_params(rel, 1);
  ForwardOptions eval;
  eval.mode = Mode::Eval;
  Rng rng(1);
  ad::Tape t1, t2;
  const Tensor a = forward(t1, f, pool, pp, eval, rng).video_feature.value();
  const Tensor b = forward(t1, rev, pool, pp, eval, rng).video_feature.value();
  test::check_close(a, std::vector<double>(b.values().begin(), b.values().end()), 1e-14);
  const Tensor ra = forward(t2, f, rel, rp, eval, rng).video_feature.value();
  const Tensor rb = forward(t2, rev, rel, rp, eval, rng).video_feature.value();
  double diff = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) diff = std::max(diff, std::abs(ra[i] - rb[i]));
  CHECK(diff > 1e-6);
}

TEST_CASE("attention examples") {
  ad::Tape tape;
  Var r = tape.input(Tensor::matrix({{1.0, -2.0}}));
  RelationFeatureSet rel{{2, r}};

  SUBCASE("equal logits") {
    std::map<std::size_t, Var> logits{{2, tape.constant(Tensor::matrix({{0.3, 0.3}}))}};
    const auto att = attend_relations(rel, logits);
    CHECK(att.weights.at(2)[0] == doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-14));
    test::check_close(att.attended.at(2).value(), {2.0 - std::log(2.0), -2.0 * (2.0 - std::log(2.0))}, 1e-14);
  }
  SUBCASE("one-hot domain prediction") {
    std::map<std::size_t, Var> logits{{2, tape.constant(Tensor::matrix({{800.0, 0.0}}))}};
    const auto att = attend_relations(rel, logits);
    CHECK(att.weights.at(2)[0] == 1.0);
    test::check_close(att.attended.at(2).value(), {2.0, -4.0}, 0);
  }
  SUBCASE("lower entropy contributes more") {
    Var r3 = tape.input(Tensor::matrix({{1.0, -2.0}}));
    RelationFeatureSet two{{2, r}, {3, r3}};
    std::map<std::size_t, Var> logits{{2, tape.constant(Tensor::matrix({{0.1, 0.0}}))},
                                      {3, tape.constant(Tensor::matrix({{2.0, 0.0}}))}};
    const auto att = attend_relations(two, logits);
    CHECK(att.weights.at(3)[0] > att.weights.at(2)[0]);
    CHECK(att.attended.at(3).value()[0] > att.attended.at(2).value()[0]);
  }
  SUBCASE("missing scale") {
    std::map<std::size_t, Var> none;
    CHECK_THROWS_AS(attend_relations(rel, none), ConfigError);
  }
  SUBCASE("gradient isolation: d(sum R')/dR = (1 + w) I") {
    Var d = tape.input(Tensor::matrix({{0.7, -0.4}}));
    std::map<std::size_t, Var> logits{{2, d}};
    const auto att = attend_relations(rel, logits);
    tape.backward(ad::sum(att.attended.at(2)));
    const double w = att.weights.at(2)[0];
    test::check_close(tape.grad(r), std::vector<double>{1.0 + w, 1.0 + w}, 0);
    for (double g : tape.grad(d)) CHECK(g == 0.0);
  }
}

TEST_CASE("attention weights stay in [1 - ln 2, 1] and fall with entropy") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 5.0);
  const double lo = 1.0 - std::log(2.0);
  for (int i = 0; i < 100000; ++i) {
    const double z[2] = {n(rng), n(rng)};
    const double w = 1.0 - losses::logits_entropy_value(z);
    REQUIRE(w >= lo - 1e-15);
    REQUIRE(w <= 1.0);
  }
  double prev = 2.0;
  for (double gap = 0.0; gap < 10.0; gap += 0.5) {
    const double z[2] = {gap, 0.0};
    const double h = losses::logits_entropy_value(z);
    CHECK(h <= prev);
    prev = h;
  }
}

TEST_CASE("classify examples") {
  ModelConfig c = small_config(TemporalKind::Pooling);
  c.num_classes = 2;
  ModelParams p = init_params(c, 1);
  ad::Tape tape;
  Var feat = tape.constant(Tensor::matrix({{1, 0, 0}, {0.2, -3, 4}}));

  set_zero(p.at("classifier.0.weight"));
  p.at("classifier.0.bias") = Tensor::vector({0.25, -0.5});
  test::check_close(classify(tape, feat, p).value(), {0.25, -0.5, 0.25, -0.5}, 0);

  auto& W = p.at("classifier.0.weight");
  W = Tensor::matrix({{1, -1}, {2, -2}, {-0.5, 0.5}});
  set_zero(p.at("classifier.0.bias"));
  // The tape binds parameters on first use, so the new weights need a new tape.
  ad::Tape fresh;
  feat = fresh.constant(Tensor::matrix({{1, 0, 0}, {0.2, -3, 4}}));
  const Tensor z = classify(fresh, feat, p).value();
  CHECK(z.at(0, 0) == -z.at(0, 1));
  CHECK(z.at(1, 0) == -z.at(1, 1));
  CHECK(z.at(0, 0) == 1.0);  // unit vector e0 picks row 0
  CHECK(z.at(1, 0) == doctest::Approx(0.2 - 6 - 2));

  CHECK_THROWS_AS(classify(fresh, fresh.constant(Tensor::matrix({{1, 2}})), p), ShapeError);
}

TEST_CASE("domain classifier GRL behaviour") {
  ModelConfig c = small_config(TemporalKind::Pooling);
  c.use_td = true;
  c.domain_hidden = 4;
  ModelParams p = init_params(c, 3);
  const Tensor feats = random_frames(1, 4, 3, 2).reshaped({4, 3});
  const std::vector<int> dom{0, 0, 1, 1};

  auto run = [&](double lambda, bool identity) {
    ad::Tape tape;
    Var x = tape.input(feats);
    Var logits = identity ? apply_mlp(tape, x, p, prefix::domain_td) : domain_classify(tape, x, lambda, p, prefix::domain_td);
    // Plain cross-entropy via log-softmax to keep this test independent of the losses module.
    Var probs = ad::softmax(logits);
    Tensor mask({4, 2});
    for (std::size_t i = 0; i < 4; ++i) mask.at(i, dom[i]) = 1.0;
    tape.backward(ad::sum(ad::mul(probs, tape.constant(mask))));
    return std::make_pair(logits.value(), tape.grad(x));
  };
  const auto [l0, g0] = run(0.0, false);
  const auto [l1, g1] = run(0.7, false);
  const auto [li, gi] = run(0.0, true);
  for (std::size_t i = 0; i < l0.size(); ++i) {
    CHECK(l0[i] == l1[i]);
    CHECK(l0[i] == li[i]);
  }
  for (double g : g0) CHECK(g == 0.0);
  for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g1[i] == doctest::Approx(-0.7 * gi[i]).epsilon(1e-12));

  ModelParams missing = init_params(small_config(TemporalKind::Pooling), 3);
  ad::Tape tape;
  CHECK_THROWS_AS(domain_classify(tape, tape.constant(feats), 1.0, missing, prefix::domain_td), ConfigError);
}

TEST_CASE("forward flag contract") {
  SUBCASE("pooling, no adaptation") {
    ModelConfig c = small_config(TemporalKind::Pooling);
    ModelParams p = init_params(c, 1);
    ad::Tape tape;
    Rng rng(1);
    const auto out = forward(tape, random_frames(2, 3, 3, 1), c, p, {}, rng);
    CHECK(out.class_logits.value().dim(0) == 2);
    CHECK(!out.spatial_domain_logits);
    CHECK(out.relation_domain_logits.empty());
    CHECK(!out.video_domain_logits);
    CHECK(out.attention_weights.empty());
  }
  SUBCASE("relation, K=5, all flags") {
    ModelConfig c = small_config(TemporalKind::Relation, 5, 3);
    c.use_sd = c.use_rd = c.use_td = c.use_attention = true;
    ModelParams p = init_params(c, 1);
    ad::Tape tape;
    Rng rng(1);
    const auto out = forward(tape, random_frames(2, 5, 3, 1), c, p, {}, rng);
    REQUIRE(out.spatial_domain_logits);
    CHECK(out.spatial_domain_logits->value().dim(0) == 10);
    CHECK(out.spatial_domain_logits->value().dim(1) == 2);
    CHECK(out.relation_domain_logits.size() == 4);
    CHECK(out.attention_weights.size() == 4);
    REQUIRE(out.video_domain_logits);
    CHECK(out.video_domain_logits->value().dim(1) == 2);
  }
  SUBCASE("identical videos give identical rows") {
    ModelConfig c = small_config(TemporalKind::Relation, 4, 3);
    c.use_sd = c.use_rd = c.use_td = c.use_attention = true;
    ModelParams p = init_params(c, 2);
    const Tensor one = random_frames(1, 4, 3, 6);
    Tensor two({2, 4, 3});
    for (std::size_t i = 0; i < 12; ++i) two[i] = two[12 + i] = one[i];
    ad::Tape tape;
    Rng rng(1);
    const auto out = forward(tape, two, c, p, {}, rng);
    const Tensor& z = out.class_logits.value();
    for (std::size_t j = 0; j < 3; ++j) CHECK(z.at(0, j) == z.at(1, j));
    const Tensor& d = out.video_domain_logits->value();
    CHECK(d.at(0, 0) == d.at(1, 0));
    for (const auto& [n, w] : out.attention_weights) CHECK(w[0] == w[1]);
  }
  SUBCASE("bad frame shape") {
    ModelConfig c = small_config(TemporalKind::Pooling);
    ModelParams p = init_params(c, 1);
    ad::Tape tape;
    Rng rng(1);
    CHECK_THROWS_AS(forward(tape, random_frames(2, 4, 3, 1), c, p, {}, rng), ShapeError);
  }
}

TEST_CASE("params: layout, determinism and mismatch diagnostics") {
  ModelConfig c = small_config(TemporalKind::Relation, 4, 3);
  c.use_rd = c.use_sd = c.use_td = true;
  const ModelParams a = init_params(c, 7), b = init_params(c, 7), other = init_params(c, 8);
  CHECK(a.tensors().size() == b.tensors().size());
  for (const auto& [name, t] : a.tensors()) {
    const auto& u = b.at(name);
    for (std::size_t i = 0; i < t.size(); ++i) REQUIRE(t[i] == u[i]);
  }
  CHECK(a.at("spatial.0.weight")[0] != other.at("spatial.0.weight")[0]);
  for (std::size_t n = 2; n <= 4; ++n) {
    CHECK(a.contains(prefix::relation(n) + ".0.weight"));
    CHECK(a.at(prefix::domain_rd(n) + ".0.weight").dim(1) == 2);
  }
  CHECK(!a.contains(prefix::relation(5) + ".0.weight"));
  check_params(c, a);

  ModelConfig wider = c;
  wider.feature_dim = 5;
  try {
    check_params(wider, a);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[5x3]") != std::string::npos);
    CHECK(msg.find("[3x3]") != std::string::npos);
  }
}
