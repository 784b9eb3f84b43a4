#include "lipsynth/nn/blocks.hpp"

namespace lipsynth::nn {

namespace {

void check_finite(const Tensor& t, const char* where) {
    if (!t.value().allFinite())
        throw std::runtime_error(std::string("non-finite activation in ") + where);
}

}  // namespace

Tensor FftBlock::forward(Ctx& ctx, const Tensor& x) const {
    if (x.cols() != attn.dim) throw std::runtime_error("fft_block: input dim mismatch");
    Tensor a = attn.forward(x, x, x);
    if (ctx.training) a = dropout(a, drop, true, *ctx.rng);
    Tensor y = ln_attn.forward(add(x, a));
    Tensor f = conv2.forward(relu(conv1.forward(y)));
    if (ctx.training) f = dropout(f, drop, true, *ctx.rng);
    Tensor z = ln_ff.forward(add(y, f));
    check_finite(z, "fft_block");
    return z;
}

void FftBlock::collect(ParamSet& ps, const std::string& prefix) const {
    attn.collect(ps, prefix + ".attn");
    ln_attn.collect(ps, prefix + ".ln_attn");
    ln_ff.collect(ps, prefix + ".ln_ff");
    conv1.collect(ps, prefix + ".conv1");
    conv2.collect(ps, prefix + ".conv2");
}

ConformerBlock::ConformerBlock(const BlockConfig& cfg, Rng& rng)
    : ln_ff1(cfg.hidden_dim),
      ln_attn(cfg.hidden_dim),
      ln_conv(cfg.hidden_dim),
      ln_conv_mid(cfg.hidden_dim),
      ln_ff2(cfg.hidden_dim),
      ln_out(cfg.hidden_dim),
      ff1_a(cfg.hidden_dim, cfg.hidden_dim * cfg.ff_expansion, rng),
      ff1_b(cfg.hidden_dim * cfg.ff_expansion, cfg.hidden_dim, rng),
      ff2_a(cfg.hidden_dim, cfg.hidden_dim * cfg.ff_expansion, rng),
      ff2_b(cfg.hidden_dim * cfg.ff_expansion, cfg.hidden_dim, rng),
      attn(cfg.hidden_dim, cfg.heads, rng),
      conv_point_in(cfg.hidden_dim, cfg.hidden_dim * 2, rng),
      conv_depth_w(uniform_fan_in(cfg.conv_kernel, cfg.hidden_dim, cfg.conv_kernel, rng), true),
      conv_point_out(cfg.hidden_dim, cfg.hidden_dim, rng),
      conv_kernel(cfg.conv_kernel),
      drop(cfg.dropout) {}

Tensor ConformerBlock::forward(Ctx& ctx, const Tensor& x) const {
    if (x.cols() != attn.dim) throw std::runtime_error("conformer_block: input dim mismatch");
    const long d = attn.dim;

    auto half_ff = [&](const Tensor& in, const LayerNorm& ln, const Linear& a,
                       const Linear& b) {
        Tensor h = swish(a.forward(ln.forward(in)));
        if (ctx.training) h = dropout(h, drop, true, *ctx.rng);
        Tensor o = b.forward(h);
        if (ctx.training) o = dropout(o, drop, true, *ctx.rng);
        return add(in, scale(o, 0.5));
    };

    Tensor h = half_ff(x, ln_ff1, ff1_a, ff1_b);

    Tensor an = ln_attn.forward(h);
    Tensor a = attn.forward(an, an, an);
    if (ctx.training) a = dropout(a, drop, true, *ctx.rng);
    h = add(h, a);

    {
        Tensor c = conv_point_in.forward(ln_conv.forward(h));
        Tensor gate_in = slice_cols(c, 0, d);
        Tensor gate = sigmoid(slice_cols(c, d, d));
        Tensor glu = mul(gate_in, gate);
        Tensor dw = depthwise_conv1d_same(glu, conv_depth_w, conv_kernel);
        Tensor cm = conv_point_out.forward(swish(ln_conv_mid.forward(dw)));
        if (ctx.training) cm = dropout(cm, drop, true, *ctx.rng);
        h = add(h, cm);
    }

    h = half_ff(h, ln_ff2, ff2_a, ff2_b);
    Tensor out = ln_out.forward(h);
    check_finite(out, "conformer_block");
    return out;
}

void ConformerBlock::collect(ParamSet& ps, const std::string& prefix) const {
    ln_ff1.collect(ps, prefix + ".ln_ff1");
    ff1_a.collect(ps, prefix + ".ff1_a");
    ff1_b.collect(ps, prefix + ".ff1_b");
    ln_attn.collect(ps, prefix + ".ln_attn");
    attn.collect(ps, prefix + ".attn");
    ln_conv.collect(ps, prefix + ".ln_conv");
    conv_point_in.collect(ps, prefix + ".conv_point_in");
    ps.add(prefix + ".conv_depth_w", conv_depth_w);
    ln_conv_mid.collect(ps, prefix + ".ln_conv_mid");
    conv_point_out.collect(ps, prefix + ".conv_point_out");
    ln_ff2.collect(ps, prefix + ".ln_ff2");
    ff2_a.collect(ps, prefix + ".ff2_a");
    ff2_b.collect(ps, prefix + ".ff2_b");
    ln_out.collect(ps, prefix + ".ln_out");
}

Tensor VariancePredictor::forward(Ctx& ctx, const Tensor& x) const {
    if (x.cols() != conv1.w.rows() / conv1.kernel)
        throw std::runtime_error("variance_predictor: input dim mismatch");
    Tensor h = ln1.forward(relu(conv1.forward(x)));
    if (ctx.training) h = dropout(h, drop, true, *ctx.rng);
    h = ln2.forward(relu(conv2.forward(h)));
    if (ctx.training) h = dropout(h, drop, true, *ctx.rng);
    Tensor o = out.forward(h);
    check_finite(o, "variance_predictor");
    return o;  // T x 1
}

void VariancePredictor::collect(ParamSet& ps, const std::string& prefix) const {
    conv1.collect(ps, prefix + ".conv1");
    ln1.collect(ps, prefix + ".ln1");
    conv2.collect(ps, prefix + ".conv2");
    ln2.collect(ps, prefix + ".ln2");
    out.collect(ps, prefix + ".out");
}

}  // namespace lipsynth::nn
