#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "srugc/model.hpp"
#include "srugc/serialize.hpp"
#include "support.hpp"

using namespace srugc;
using namespace srugc::testing;

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

ModelParams hand_params() {
  ModelSpec s;
  s.kind = ModelKind::sru;
  s.d_phi = s.d_r = s.d_o = 1;
  s.scales = ScaleSet({1.0});
  s.activation = Activation::relu();
  SeededRng rng(0);
  ModelParams p = init_params(s, 1, rng);
  for_each_entry(p, false, [](const std::string& name, double& v) {
    v = name.find("b_") == 0 || name.find(".bias") != std::string::npos ? 0.0 : 1.0;
  });
  return p;
}

}  // namespace

TEST(GroupIndexMap, FirstGroupOfFiveByThree) {
  const auto g = build_group_index_map(5, 3);
  EXPECT_EQ(g.group(0, 0), std::vector<int>({0, 5, 10}));
  EXPECT_EQ(g.group(7, 0), g.group(0, 0));
}

TEST(GroupIndexMap, SingleScaleGivesSingletons) {
  const auto g = build_group_index_map(4, 1);
  for (int k = 0; k < 4; ++k) EXPECT_EQ(g.group(0, k), std::vector<int>({k}));
}

TEST(GroupIndexMap, GroupsPartitionTheRow) {
  const auto g = build_group_index_map(6, 4);
  std::set<int> all;
  std::size_t total = 0;
  for (int k = 0; k < 6; ++k) {
    const auto grp = g.group(2, k);
    total += grp.size();
    all.insert(grp.begin(), grp.end());
  }
  EXPECT_EQ(total, 24u);
  EXPECT_EQ(all.size(), 24u);
  EXPECT_EQ(*all.rbegin(), 23);
  EXPECT_THROW(g.group(0, 6), Error);
}

TEST(SruForward, HandEvaluatedTwoStepExample) {
  const ModelParams p = hand_params();
  const Eigen::MatrixXd seq = (Eigen::MatrixXd(2, 1) << 1.0, 2.0).finished();
  const auto out = sru_forward(p, seq);
  ASSERT_EQ(out.predictions.size(), 1);
  EXPECT_EQ(out.predictions(0), 1.0);
  EXPECT_EQ(straight_line_forward(p, seq)[0], 1.0);
}

TEST(SruForward, ZeroWeightsPredictOutputBias) {
  const auto spec = tiny_spec(ModelKind::sru);
  ModelParams p = random_params(spec, 4, 3);
  for_each_entry(p, true, [](const std::string&, double& v) { v = 0.0; });
  p.b_y = 2.75;
  const auto pred = forward(p, random_sequence(9, 4, 1)).predictions;
  EXPECT_TRUE((pred.array() == 2.75).all());
}

TEST(SruForward, ZeroScaleStateStaysZero) {
  TinyDims d;
  d.scales = {0.0, 0.5};
  const auto p = random_params(tiny_spec(ModelKind::sru, d), 4, 5);
  const auto fwd = forward(p, random_sequence(12, 4, 2), true);
  EXPECT_TRUE((fwd.trace->u.topRows(d.d_phi).array() == 0.0).all());
  EXPECT_FALSE((fwd.trace->u.bottomRows(d.d_phi).rightCols(11).array() == 0.0).all());
}

TEST(SruForward, NonFiniteValueReportsStep) {
  auto p = random_params(tiny_spec(ModelKind::sru), 4, 5);
  Eigen::MatrixXd seq = random_sequence(6, 4, 2);
  seq(3, 0) = 1e308;
  p.w_in *= 1e10;
  try {
    forward(p, seq);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos) << e.what();
  }
}

TEST(SruForward, KindMismatchRejected) {
  const auto p = random_params(tiny_spec(ModelKind::esru), 4, 5);
  EXPECT_THROW(sru_forward(p, random_sequence(5, 4, 1)), Error);
  const auto q = random_params(tiny_spec(ModelKind::sru), 4, 5);
  EXPECT_THROW(esru_forward(q, random_sequence(5, 4, 1)), Error);
  EXPECT_THROW(forward(q, random_sequence(5, 3, 1)), Error);
  EXPECT_THROW(forward(q, random_sequence(1, 4, 1)), Error);
}

TEST(EsruForward, IdentityEncoderSingleLayerReducesToSru) {
  const auto sru = random_params(tiny_spec(ModelKind::sru), 4, 12);
  ModelParams e = sru;
  e.kind = ModelKind::esru;
  e.encoder = Eigen::MatrixXd::Identity(sru.state_dim(), sru.state_dim());
  const auto seq = random_sequence(15, 4, 3);
  EXPECT_EQ(esru_forward(e, seq).predictions, sru_forward(sru, seq).predictions);
}

TEST(EsruForward, FirstFeedbackIndependentOfInput) {
  const auto p = random_params(tiny_spec(ModelKind::esru), 4, 8);
  const auto a = forward(p, random_sequence(5, 4, 1), true);
  const auto b = forward(p, random_sequence(5, 4, 2), true);
  EXPECT_EQ(a.trace->layer_out.back().col(0), b.trace->layer_out.back().col(0));
  EXPECT_NE(a.trace->layer_out.back().col(1), b.trace->layer_out.back().col(1));
}

TEST(EsruForward, Deterministic) {
  const auto p = random_params(tiny_spec(ModelKind::esru), 4, 8);
  const auto seq = random_sequence(20, 4, 1);
  EXPECT_EQ(forward(p, seq).predictions, forward(p, seq).predictions);
}

TEST(Forward, MatchesStraightLineOracleBitExact) {
  for (int inst = 0; inst < 50; ++inst) {
    for (auto kind : {ModelKind::sru, ModelKind::esru}) {
      auto spec = tiny_spec(kind);
      spec.feedback_lag = inst % 5 == 4;
      if (inst % 3 == 1) spec.activation = Activation::relu();
      const auto p = random_params(spec, 4, 100 + inst);
      const auto seq = random_sequence(2 + inst % 9, 4, 500 + inst);
      EXPECT_EQ(to_std(forward(p, seq).predictions), straight_line_forward(p, seq))
          << "instance " << inst << " kind " << to_string(kind);
    }
  }
}

TEST(Forward, ColumnsEntryPointAgrees) {
  const auto p = random_params(tiny_spec(ModelKind::esru), 4, 8);
  const auto seq = random_sequence(10, 4, 1);
  EXPECT_EQ(forward(p, seq).predictions, forward_columns(p, seq.transpose()).predictions);
}

TEST(Backward, SruMatchesFiniteDifferences) {
  const auto p = random_params(tiny_spec(ModelKind::sru), 4, 7);
  const auto g = finite_difference_check(p, random_sequence(6, 4, 7), 1, false);
  EXPECT_LT(g.max_rel_err, 1e-5) << g.worst;
  EXPECT_GT(g.coordinates, 50);
}

TEST(Backward, EsruTwoLayerMatchesFiniteDifferences) {
  const auto p = random_params(tiny_spec(ModelKind::esru), 4, 7);
  const auto g = finite_difference_check(p, random_sequence(6, 4, 7), 2, false);
  EXPECT_LT(g.max_rel_err, 1e-5) << g.worst;
}

TEST(Backward, TrainableEncoderGradient) {
  const auto p = random_params(tiny_spec(ModelKind::esru), 4, 9);
  const auto g = finite_difference_check(p, random_sequence(6, 4, 9), 0, true);
  EXPECT_LT(g.max_rel_err, 1e-5) << g.worst;
}

TEST(Backward, FeedbackLagAndReluVariants) {
  auto spec = tiny_spec(ModelKind::sru);
  spec.feedback_lag = true;
  auto g = finite_difference_check(random_params(spec, 4, 21), random_sequence(7, 4, 3), 3, false);
  EXPECT_LT(g.max_rel_err, 1e-5) << g.worst;
  // ReLU kinks make finite differences unreliable only within `step` of 0;
  // the random draws keep every pre-activation well away from it.
  auto rspec = tiny_spec(ModelKind::esru, {}, Activation::relu());
  g = finite_difference_check(random_params(rspec, 4, 22), random_sequence(7, 4, 4), 0, false);
  EXPECT_LT(g.max_rel_err, 1e-5) << g.worst;
}

TEST(Backward, EncoderGradientZeroUnlessTrained) {
  const auto p = random_params(tiny_spec(ModelKind::esru), 4, 9);
  const auto seq = random_sequence(6, 4, 9);
  const auto fwd = forward(p, seq, true);
  const Eigen::VectorXd res = Eigen::VectorXd::Ones(5);
  EXPECT_TRUE((backward(p, *fwd.trace, res, false).encoder.array() == 0.0).all());
  EXPECT_FALSE((backward(p, *fwd.trace, res, true).encoder.array() == 0.0).all());
}

TEST(Backward, ZeroResidualsGiveZeroGradients) {
  for (auto kind : {ModelKind::sru, ModelKind::esru}) {
    auto p = random_params(tiny_spec(kind), 4, 4);
    const auto fwd = forward(p, random_sequence(8, 4, 4), true);
    auto g = backward(p, *fwd.trace, Eigen::VectorXd::Zero(7), true);
    for_each_entry(g, true, [](const std::string& name, double& v) { EXPECT_EQ(v, 0.0) << name; });
  }
}

TEST(Backward, ResidualCountMismatchRejected) {
  const auto p = random_params(tiny_spec(ModelKind::sru), 4, 4);
  const auto fwd = forward(p, random_sequence(8, 4, 4), true);
  EXPECT_THROW(backward(p, *fwd.trace, Eigen::VectorXd::Zero(6)), Error);
}

TEST(Ewma, ClosedFormMatchesRecursion) {
  SeededRng rng(31);
  for (double a : {0.0, 0.01, 0.1, 0.99}) {
    std::vector<double> phi(200);
    for (double& v : phi) v = rng.gaussian();
    const auto rec = ewma_recursive(phi, a);
    const auto closed = ewma_closed_form(phi, a);
    for (std::size_t t = 0; t < phi.size(); ++t) EXPECT_NEAR(rec[t], closed[t], 1e-12) << a;
  }
}

TEST(Ewma, ForwardStateFollowsClosedForm) {
  TinyDims d;
  d.scales = {0.0, 0.01, 0.1, 0.99};
  const auto p = random_params(tiny_spec(ModelKind::sru, d), 4, 13);
  const auto fwd = forward(p, random_sequence(60, 4, 13), true);
  const auto& tr = *fwd.trace;
  for (int l = 0; l < 4; ++l) {
    for (int k = 0; k < d.d_phi; ++k) {
      const Eigen::VectorXd row = tr.phi.row(k).transpose();
      const auto closed = ewma_closed_form(to_std(row), d.scales[l]);
      for (std::size_t c = 0; c < closed.size(); ++c)
        EXPECT_NEAR(tr.u(l * d.d_phi + k, c + 1), closed[c], 1e-12);
    }
  }
}

TEST(Forward, PredictionsAreCausal) {
  const auto p = random_params(tiny_spec(ModelKind::esru), 4, 17);
  const auto seq = random_sequence(12, 4, 17);
  const auto base = forward(p, seq).predictions;
  for (int s = 1; s < 12; ++s) {
    Eigen::MatrixXd q = seq;
    q.row(s).array() += 3.0;
    const auto pert = forward(p, q).predictions;
    // predictions(c) = xhat_{c+2} uses rows 0..c.
    for (int c = 0; c < s; ++c) EXPECT_EQ(pert(c), base(c)) << "s=" << s << " c=" << c;
    if (s < 11) {
      EXPECT_NE(pert(s), base(s));
    }
  }
}

TEST(Forward, ZeroInputColumnMakesComponentIrrelevant) {
  for (auto kind : {ModelKind::sru, ModelKind::esru}) {
    auto p = random_params(tiny_spec(kind), 4, 19);
    p.w_in.col(2).setZero();
    const auto seq = random_sequence(15, 4, 19);
    Eigen::MatrixXd q = seq;
    q.col(2) = random_sequence(15, 1, 77).col(0) * 1e3;
    EXPECT_EQ(forward(p, seq).predictions, forward(p, q).predictions);
  }
}

TEST(Forward, PermutationEquivarianceDyadicIsExact) {
  const std::vector<int> perm = {2, 0, 3, 1};
  auto p = random_params(tiny_spec(ModelKind::esru), 4, 23);
  SeededRng rng(23);
  for (Eigen::Index i = 0; i < p.w_in.size(); ++i) p.w_in(i) = (static_cast<int>(rng.uniform_index(17)) - 8) / 8.0;
  Eigen::MatrixXd seq(10, 4);
  for (Eigen::Index i = 0; i < seq.size(); ++i) seq(i) = (static_cast<int>(rng.uniform_index(33)) - 16) / 4.0;
  ModelParams q = p;
  Eigen::MatrixXd pseq(10, 4);
  for (int j = 0; j < 4; ++j) {
    q.w_in.col(j) = p.w_in.col(perm[j]);
    pseq.col(j) = seq.col(perm[j]);
  }
  EXPECT_EQ(forward(p, seq).predictions, forward(q, pseq).predictions);
}

TEST(Forward, PermutationEquivarianceRandomWithinRounding) {
  const std::vector<int> perm = {3, 1, 0, 2};
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_params(tiny_spec(ModelKind::sru), 4, 40 + trial);
    const auto seq = random_sequence(10, 4, 60 + trial);
    ModelParams q = p;
    Eigen::MatrixXd pseq(10, 4);
    for (int j = 0; j < 4; ++j) {
      q.w_in.col(j) = p.w_in.col(perm[j]);
      pseq.col(j) = seq.col(perm[j]);
    }
    EXPECT_LT((forward(p, seq).predictions - forward(q, pseq).predictions).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Init, FanInBoundsZeroBiasesAndSeeding) {
  const auto spec = tiny_spec(ModelKind::esru);
  SeededRng a(5), b(5);
  const auto p = init_params(spec, 4, a);
  const auto q = init_params(spec, 4, b);
  EXPECT_EQ(p.w_in, q.w_in);
  EXPECT_EQ(p.encoder, q.encoder);
  EXPECT_LE(p.w_in.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(4.0));
  EXPECT_LE(p.w_o.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(6.0));
  EXPECT_TRUE((p.b_in.array() == 0.0).all());
  EXPECT_EQ(p.b_y, 0.0);
  EXPECT_EQ(p.feedback.size(), 2u);
  EXPECT_EQ(p.feedback[0].weight.cols(), 2);
  EXPECT_EQ(p.feedback[1].weight.rows(), 2);
  EXPECT_EQ(p.nonzero_input_columns(), 4);
}

TEST(Init, SharedEncoderIsUsedVerbatim) {
  const auto spec = tiny_spec(ModelKind::esru);
  SeededRng r0(1);
  const Eigen::MatrixXd enc = sample_encoder(spec, r0);
  SeededRng r1(2), r2(3);
  EXPECT_EQ(init_params(spec, 4, r1, &enc).encoder, enc);
  EXPECT_EQ(init_params(spec, 4, r2, &enc).encoder, enc);
  const Eigen::MatrixXd wrong = Eigen::MatrixXd::Zero(3, 3);
  EXPECT_THROW(init_params(spec, 4, r1, &wrong), Error);
}

TEST(Spec, ValidationRejectsBadShapes) {
  auto spec = tiny_spec(ModelKind::esru);
  spec.d_r_sketch = 6;
  EXPECT_THROW(spec.validate(), Error);
  EXPECT_THROW(ScaleSet({0.5, 0.1}), Error);
  EXPECT_THROW(ScaleSet({1.5}), Error);
  EXPECT_THROW(ScaleSet(std::vector<double>{}), Error);
}

TEST(Serialize, ParamsRoundTripExactly) {
  for (auto kind : {ModelKind::sru, ModelKind::esru}) {
    auto spec = tiny_spec(kind, {}, Activation::elu(1.5));
    spec.feedback_lag = kind == ModelKind::sru;
    const auto p = random_params(spec, 4, 99);
    const auto back = params_from_json(Json::parse(params_to_json(p).dump()));
    const auto seq = random_sequence(8, 4, 1);
    EXPECT_EQ(forward(back, seq).predictions, forward(p, seq).predictions);
    EXPECT_EQ(back.kind, p.kind);
    EXPECT_EQ(back.feedback_lag, p.feedback_lag);
    EXPECT_EQ(back.activation.alpha, 1.5);
    EXPECT_EQ(back.init_seed, p.init_seed);
    EXPECT_EQ(back.w_in, p.w_in);
    EXPECT_EQ(back.encoder, p.encoder);
  }
}

TEST(Serialize, MalformedMatrixRejected) {
  Json j = matrix_to_json(Eigen::MatrixXd::Ones(2, 2));
  j["data"].erase(0);
  EXPECT_THROW(matrix_from_json(j, "m"), Error);
}
