#include "lipsynth/nn/blocks.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

using namespace lipsynth;
using nn::Tensor;

namespace {

Mat randn(long r, long c, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist;
    Mat m(r, c);
    for (long i = 0; i < r; ++i)
        for (long j = 0; j < c; ++j) m(i, j) = dist(rng);
    return m;
}

// Central finite differences of a scalar-valued graph wrt one leaf. The graph
// builder is re-run per probe so the whole forward is differentiated.
double max_rel_grad_error(const std::function<Tensor(const Tensor&)>& f, const Mat& x0,
                          double h = 1e-5) {
    Tensor x(x0, true);
    Tensor y = f(x);
    REQUIRE(y.rows() == 1);
    REQUIRE(y.cols() == 1);
    y.backward();
    Mat analytic = x.grad();
    REQUIRE(analytic.size() == x0.size());

    double worst = 0.0;
    for (long i = 0; i < x0.rows(); ++i) {
        for (long j = 0; j < x0.cols(); ++j) {
            Mat xp = x0, xm = x0;
            xp(i, j) += h;
            xm(i, j) -= h;
            double fp = f(Tensor(xp)).item();
            double fm = f(Tensor(xm)).item();
            double numeric = (fp - fm) / (2.0 * h);
            // the 1e-4 floor keeps central-difference rounding noise
            // (~eps*|f|/2h ~ 5e-10 here) from dominating when the true
            // gradient is zero, e.g. softmax rows under a constant target
            double denom = std::max({std::abs(numeric), std::abs(analytic(i, j)), 1e-4});
            worst = std::max(worst, std::abs(numeric - analytic(i, j)) / denom);
        }
    }
    return worst;
}

// all-positive offsets keep mean_abs_error away from its kink
Mat below(const Mat& m, double margin = 3.0) { return m.array() - margin; }

}  // namespace

TEST_CASE("autodiff: elementwise and matmul gradients") {
    Mat a = randn(3, 4, 1), b = randn(3, 4, 2), w = randn(4, 5, 3);

    CHECK(max_rel_grad_error([&](const Tensor& x) {
              return nn::mean_abs_error(nn::add(x, Tensor(b)), below(a + b));
          }, a) < 1e-6);
    CHECK(max_rel_grad_error([&](const Tensor& x) {
              return nn::mean_abs_error(nn::sub(x, Tensor(b)), below(a - b));
          }, a) < 1e-6);
    CHECK(max_rel_grad_error([&](const Tensor& x) {
              return nn::mean_abs_error(nn::mul(x, Tensor(b)), below(a.cwiseProduct(b), 20.0));
          }, a) < 1e-5);
    CHECK(max_rel_grad_error([&](const Tensor& x) {
              return nn::mean_abs_error(nn::scale(x, 1.7), below(1.7 * a, 20.0));
          }, a) < 1e-6);
    CHECK(max_rel_grad_error([&](const Tensor& x) {
              return nn::mean_abs_error(nn::matmul(x, Tensor(w)), below(a * w, 30.0));
          }, a) < 1e-5);
    CHECK(max_rel_grad_error([&](const Tensor& x) {
              return nn::mean_abs_error(nn::matmul(Tensor(a), x), below(a * w, 30.0));
          }, w) < 1e-5);
    CHECK(max_rel_grad_error([&](const Tensor& x) {
              return nn::mean_abs_error(nn::transpose(x), below(Mat(a.transpose())));
          }, a) < 1e-6);
}

TEST_CASE("autodiff: shape ops") {
    Mat a = randn(4, 6, 4);
    CHECK(max_rel_grad_error([&](const Tensor& x) {
              return nn::mean_abs_error(nn::slice_cols(x, 1, 3), below(Mat(a.middleCols(1, 3))));
          }, a) < 1e-6);
    CHECK(max_rel_grad_error([&](const Tensor& x) {
              return nn::mean_abs_error(nn::slice_rows(x, 2, 2), below(Mat(a.middleRows(2, 2))));
          }, a) < 1e-6);
    CHECK(max_rel_grad_error([&](const Tensor& x) {
              Mat t(4, 12);
              t << a, a;
              return nn::mean_abs_error(nn::concat_cols({x, x}), below(t));
          }, a) < 1e-6);
    CHECK(max_rel_grad_error([&](const Tensor& x) {
              Mat t(8, 6);
              t << a, a;
              return nn::mean_abs_error(nn::concat_rows({x, x}), below(t));
          }, a) < 1e-6);
    CHECK(max_rel_grad_error([&](const Tensor& x) {
              return nn::mean_abs_error(nn::repeat_rows(x, 3), Mat::Zero(12, 6));
          }, a) < 1e-5);
    CHECK(max_rel_grad_error([&](const Tensor& x) {
              return nn::mean_abs_error(nn::mean_pool_rows(x, 2), Mat::Zero(2, 6));
          }, a) < 1e-5);
    Mat row = randn(1, 6, 5);
    CHECK(max_rel_grad_error([&](const Tensor& x) {
              return nn::mean_abs_error(nn::add_row_broadcast(Tensor(a), x), below(a, 20.0));
          }, row) < 1e-5);
}

TEST_CASE("autodiff: nonlinearities") {
    Mat a = randn(3, 5, 6).array() + 0.3;  // keep relu off its kink
    for (long i = 0; i < a.size(); ++i)
        if (std::abs(a.data()[i]) < 0.05) a.data()[i] += 0.1;

    auto check_unary = [&](const std::string& name, Tensor (*op)(const Tensor&)) {
        INFO(name);
        CHECK(max_rel_grad_error([&](const Tensor& x) {
                  return nn::mean_abs_error(op(x), Mat::Constant(3, 5, -30.0));
              }, a) < 1e-5);
    };
    check_unary("relu", nn::relu);
    check_unary("sigmoid", nn::sigmoid);
    check_unary("swish", nn::swish);
    check_unary("tanh", nn::tanh_t);
    check_unary("softmax", nn::softmax_rows);
    Mat pos = a.array().abs() + 0.2;
    CHECK(max_rel_grad_error([&](const Tensor& x) {
              return nn::mean_abs_error(nn::log1p_t(x), Mat::Constant(3, 5, -30.0));
          }, pos) < 1e-5);
}

TEST_CASE("autodiff: layer norm, conv, embedding") {
    Mat x = randn(5, 8, 7);
    Mat gamma = randn(1, 8, 8).array() + 2.0;
    Mat beta = randn(1, 8, 9);
    CHECK(max_rel_grad_error([&](const Tensor& t) {
              return nn::mean_abs_error(nn::layer_norm_rows(t, Tensor(gamma), Tensor(beta)),
                                        Mat::Constant(5, 8, -40.0));
          }, x) < 1e-4);
    CHECK(max_rel_grad_error([&](const Tensor& t) {
              return nn::mean_abs_error(nn::layer_norm_rows(Tensor(x), t, Tensor(beta)),
                                        Mat::Constant(5, 8, -40.0));
          }, gamma) < 1e-4);

    Mat w = randn(3 * 4, 6, 10);  // k=3, cin=4, cout=6
    Mat xc = randn(7, 4, 11);
    Mat b = randn(1, 6, 12);
    CHECK(max_rel_grad_error([&](const Tensor& t) {
              return nn::mean_abs_error(nn::conv1d_same(t, Tensor(w), Tensor(b), 3),
                                        Mat::Constant(7, 6, -40.0));
          }, xc) < 1e-4);
    CHECK(max_rel_grad_error([&](const Tensor& t) {
              return nn::mean_abs_error(nn::conv1d_same(Tensor(xc), t, Tensor(b), 3),
                                        Mat::Constant(7, 6, -40.0));
          }, w) < 1e-4);

    Mat dw = randn(3, 4, 13);
    CHECK(max_rel_grad_error([&](const Tensor& t) {
              return nn::mean_abs_error(nn::depthwise_conv1d_same(Tensor(xc), t, 3),
                                        Mat::Constant(7, 4, -40.0));
          }, dw) < 1e-4);

    Mat table = randn(6, 4, 14);
    std::vector<int> ids{0, 3, 3, 5};
    CHECK(max_rel_grad_error([&](const Tensor& t) {
              return nn::mean_abs_error(nn::embedding_lookup(t, ids), Mat::Constant(4, 4, -30.0));
          }, table) < 1e-5);
}

TEST_CASE("conv1d_same matches a hand-computed case") {
    // x: T=4, one channel; kernel [1, 0, -1] tap-major; zero padding
    Mat x(4, 1);
    x << 1, 2, 3, 4;
    Mat w(3, 1);
    w << 1, 0, -1;
    Mat b = Mat::Zero(1, 1);
    Tensor y = nn::conv1d_same(Tensor(x), Tensor(w), Tensor(b), 3);
    // out[t] = sum_tap w[tap] * x[t + tap - 1]; t=0 -> 1*x[-1] + 0*x[0] - 1*x[1] = -2
    CHECK(y.value()(0, 0) == doctest::Approx(-2.0));
    CHECK(y.value()(1, 0) == doctest::Approx(1.0 - 3.0));
    CHECK(y.value()(2, 0) == doctest::Approx(2.0 - 4.0));
    CHECK(y.value()(3, 0) == doctest::Approx(3.0 - 0.0));
}

TEST_CASE("softmax rows sum to one") {
    Mat x = randn(4, 9, 15);
    Tensor s = nn::softmax_rows(Tensor(x));
    for (long r = 0; r < 4; ++r) CHECK(s.value().row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("label-smoothed cross entropy matches the hand value") {
    Mat logits(1, 3);
    logits << 10.0, 0.0, 0.0;
    Tensor loss = nn::label_smoothed_cross_entropy(Tensor(logits), {0}, 0.1);

    double z = std::exp(10.0) + 2.0;
    double lp0 = 10.0 - std::log(z);
    double lp12 = 0.0 - std::log(z);
    double on = 1.0 - 0.1 + 0.1 / 3.0;   // 0.9333...
    double off = 0.1 / 3.0;              // 0.0333...
    double expect = -(on * lp0 + off * lp12 + off * lp12);
    CHECK(loss.item() == doctest::Approx(expect).epsilon(1e-12));

    CHECK(max_rel_grad_error([&](const Tensor& t) {
              return nn::label_smoothed_cross_entropy(t, {0, 3}, 0.1);
          }, randn(2, 5, 16)) < 1e-5);

    CHECK_THROWS(nn::label_smoothed_cross_entropy(Tensor(logits), {3}, 0.1));  // id out of range
}

TEST_CASE("mean_abs_error reduces correctly") {
    Mat pred(2, 2), target(2, 2);
    pred << 1, 2, 3, 4;
    target << 0, 0, 0, 0;
    CHECK(nn::mean_abs_error(Tensor(pred), target).item() == doctest::Approx(2.5));
}

TEST_CASE("positional encoding: first row alternates 0, 1") {
    Mat pe = nn::positional_encoding(5, 8);
    for (long j = 0; j < 8; j += 2) {
        CHECK(pe(0, j) == doctest::Approx(0.0));
        CHECK(pe(0, j + 1) == doctest::Approx(1.0));
    }
    // sin/cos structure at t=1
    for (long i = 0; i < 4; ++i) {
        double angle = 1.0 / std::pow(10000.0, (2.0 * i) / 8.0);
        CHECK(pe(1, 2 * i) == doctest::Approx(std::sin(angle)));
        CHECK(pe(1, 2 * i + 1) == doctest::Approx(std::cos(angle)));
    }
}

TEST_CASE("dropout: identity in eval, inverted scaling in train") {
    Mat x = Mat::Ones(50, 40);
    nn::Rng rng(21);
    Tensor eval_out = nn::dropout(Tensor(x), 0.5, false, rng);
    CHECK((eval_out.value() - x).cwiseAbs().maxCoeff() == 0.0);

    Tensor train_out = nn::dropout(Tensor(x), 0.5, true, rng);
    long zeros = 0;
    for (long i = 0; i < train_out.value().size(); ++i) {
        double v = train_out.value().data()[i];
        if (v == 0.0) ++zeros;
        else CHECK(v == doctest::Approx(2.0));  // 1 / (1 - p)
    }
    double frac = static_cast<double>(zeros) / x.size();
    CHECK(frac > 0.4);
    CHECK(frac < 0.6);
}

TEST_CASE("linear identity passes input through") {
    nn::Rng rng(31);
    nn::Linear lin(6, 6, rng);
    lin.set_identity();
    Mat x = randn(3, 6, 32);
    CHECK((lin.forward(Tensor(x)).value() - x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("layer norm output has zero mean, unit variance rows") {
    nn::Rng rng(33);
    nn::LayerNorm ln(10);
    Mat x = randn(4, 10, 34).array() * 3.0 + 1.0;
    Mat y = ln.forward(Tensor(x)).value();
    for (long r = 0; r < y.rows(); ++r) {
        CHECK(y.row(r).mean() == doctest::Approx(0.0).epsilon(1e-9));
        double var = (y.row(r).array() - y.row(r).mean()).square().mean();
        CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("attention: output shape and permutation invariance over keys") {
    nn::Rng rng(41);
    nn::MultiHeadAttention attn(8, 2, rng);
    Mat q = randn(5, 8, 42), kv = randn(7, 8, 43);
    Tensor out = attn.forward(Tensor(q), Tensor(kv), Tensor(kv));
    CHECK(out.rows() == 5);
    CHECK(out.cols() == 8);

    // permuting key/value rows must not change the pooled result
    std::vector<int> perm{3, 0, 6, 1, 5, 2, 4};
    Mat kvp(7, 8);
    for (int i = 0; i < 7; ++i) kvp.row(i) = kv.row(perm[i]);
    Tensor out_p = attn.forward(Tensor(q), Tensor(kvp), Tensor(kvp));
    CHECK((out.value() - out_p.value()).cwiseAbs().maxCoeff() < 1e-9);

    CHECK_THROWS(nn::MultiHeadAttention(10, 3, rng));
}

TEST_CASE("blocks: shapes and gradient flow at toy width") {
    nn::BlockConfig cfg;
    cfg.hidden_dim = 8;
    cfg.heads = 2;
    cfg.conv_kernel = 3;
    cfg.ff_expansion = 2;
    cfg.dropout = 0.0;
    nn::Rng rng(51);

    nn::FftBlock fft(cfg, rng);
    nn::ConformerBlock conf(cfg, rng);
    nn::VariancePredictor vp(cfg, rng);
    Mat x = randn(6, 8, 52);
    nn::Ctx ctx = nn::eval_ctx();

    CHECK(fft.forward(ctx, Tensor(x)).rows() == 6);
    CHECK(fft.forward(ctx, Tensor(x)).cols() == 8);
    CHECK(conf.forward(ctx, Tensor(x)).rows() == 6);
    CHECK(conf.forward(ctx, Tensor(x)).cols() == 8);
    CHECK(vp.forward(ctx, Tensor(x)).rows() == 6);
    CHECK(vp.forward(ctx, Tensor(x)).cols() == 1);

    CHECK(max_rel_grad_error([&](const Tensor& t) {
              nn::Ctx c = nn::eval_ctx();
              return nn::mean_abs_error(fft.forward(c, t), Mat::Constant(6, 8, -40.0));
          }, x) < 1e-3);
    CHECK(max_rel_grad_error([&](const Tensor& t) {
              nn::Ctx c = nn::eval_ctx();
              return nn::mean_abs_error(conf.forward(c, t), Mat::Constant(6, 8, -40.0));
          }, x) < 1e-3);
    CHECK(max_rel_grad_error([&](const Tensor& t) {
              nn::Ctx c = nn::eval_ctx();
              return nn::mean_abs_error(vp.forward(c, t), Mat::Constant(6, 1, -40.0));
          }, x) < 1e-3);
}

TEST_CASE("parameter registration names are unique and complete") {
    nn::BlockConfig cfg;
    cfg.hidden_dim = 8;
    cfg.heads = 2;
    cfg.conv_kernel = 3;
    cfg.ff_expansion = 2;
    nn::Rng rng(61);
    nn::ConformerBlock conf(cfg, rng);
    nn::ParamSet ps;
    conf.collect(ps, "conf");
    CHECK(ps.size() > 10);
    for (const auto& [name, t] : ps) {
        CHECK(name.rfind("conf.", 0) == 0);
        CHECK(t.requires_grad());
    }
    CHECK_THROWS(conf.collect(ps, "conf"));  // duplicate names rejected
}

TEST_CASE("backward accumulates through shared subgraphs") {
    Mat a = randn(2, 2, 71);
    Tensor x(a, true);
    Tensor y = nn::add(x, x);  // dy/dx = 2
    Tensor loss = nn::mean_abs_error(y, below(2.0 * a, 20.0));
    loss.backward();
    Mat expect = Mat::Constant(2, 2, 2.0 / 4.0);
    CHECK((x.grad() - expect).cwiseAbs().maxCoeff() < 1e-12);
}
