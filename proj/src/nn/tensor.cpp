#include "lipsynth/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace lipsynth::nn {

Tensor::Tensor(Mat value, bool requires_grad) {
    node_ = std::make_shared<Node>();
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
}

Tensor Tensor::scalar(double v) {
    Mat m(1, 1);
    m(0, 0) = v;
    return Tensor(std::move(m));
}

double Tensor::item() const {
    if (rows() != 1 || cols() != 1) throw std::runtime_error("item() on non-scalar tensor");
    return node_->value(0, 0);
}

Tensor make_op(Mat value, std::vector<Tensor> parents, std::function<void(Node&)> backward) {
    Tensor out;
    out.node_ = std::make_shared<Node>();
    out.node_->value = std::move(value);
    bool needs = false;
    for (const auto& p : parents) {
        if (p.defined()) {
            out.node_->parents.push_back(p.node());
            needs = needs || p.node()->requires_grad;
        }
    }
    out.node_->requires_grad = needs;
    if (needs) out.node_->backward = std::move(backward);
    return out;
}

namespace {

// Iterative post-order DFS: children after all their parents were pushed.
void topo_sort(const std::shared_ptr<Node>& root, std::vector<Node*>& order) {
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, size_t>> stack;
    stack.push_back({root.get(), 0});
    seen.insert(root.get());
    while (!stack.empty()) {
        auto& [node, idx] = stack.back();
        if (idx < node->parents.size()) {
            Node* p = node->parents[idx++].get();
            if (p->requires_grad && !seen.count(p)) {
                seen.insert(p);
                stack.push_back({p, 0});
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
}

void accumulate(const std::shared_ptr<Node>& parent, const Mat& g) {
    if (!parent->requires_grad) return;
    parent->ensure_grad();
    parent->grad += g;
}

}  // namespace

void Tensor::backward() const {
    if (!defined()) throw std::runtime_error("backward() on undefined tensor");
    if (rows() != 1 || cols() != 1) throw std::runtime_error("backward() requires a 1x1 scalar");
    std::vector<Node*> order;
    topo_sort(node_, order);
    node_->ensure_grad();
    node_->grad(0, 0) = 1.0;
    // `order` is post-order (parents of the root come first), so walk backwards.
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward && n->has_grad()) n->backward(*n);
    }
}

// ---- primitive ops -------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::runtime_error("add: shape mismatch");
    auto an = a.node(), bn = b.node();
    return make_op(a.value() + b.value(), {a, b}, [an, bn](Node& n) {
        accumulate(an, n.grad);
        accumulate(bn, n.grad);
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::runtime_error("sub: shape mismatch");
    auto an = a.node(), bn = b.node();
    return make_op(a.value() - b.value(), {a, b}, [an, bn](Node& n) {
        accumulate(an, n.grad);
        accumulate(bn, -n.grad);
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::runtime_error("mul: shape mismatch");
    auto an = a.node(), bn = b.node();
    return make_op(a.value().cwiseProduct(b.value()), {a, b}, [an, bn](Node& n) {
        accumulate(an, n.grad.cwiseProduct(bn->value));
        accumulate(bn, n.grad.cwiseProduct(an->value));
    });
}

Tensor scale(const Tensor& a, double s) {
    auto an = a.node();
    return make_op(a.value() * s, {a}, [an, s](Node& n) { accumulate(an, n.grad * s); });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) throw std::runtime_error("matmul: inner dimension mismatch");
    auto an = a.node(), bn = b.node();
    return make_op(a.value() * b.value(), {a, b}, [an, bn](Node& n) {
        accumulate(an, n.grad * bn->value.transpose());
        accumulate(bn, an->value.transpose() * n.grad);
    });
}

Tensor transpose(const Tensor& a) {
    auto an = a.node();
    return make_op(a.value().transpose(), {a},
                   [an](Node& n) { accumulate(an, n.grad.transpose()); });
}

Tensor slice_cols(const Tensor& a, long start, long n) {
    if (start < 0 || start + n > a.cols()) throw std::runtime_error("slice_cols: out of range");
    auto an = a.node();
    return make_op(a.value().middleCols(start, n), {a}, [an, start, n](Node& g) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        an->grad.middleCols(start, n) += g.grad;
    });
}

Tensor slice_rows(const Tensor& a, long start, long n) {
    if (start < 0 || start + n > a.rows()) throw std::runtime_error("slice_rows: out of range");
    auto an = a.node();
    return make_op(a.value().middleRows(start, n), {a}, [an, start, n](Node& g) {
        if (!an->requires_grad) return;
        an->ensure_grad();
        an->grad.middleRows(start, n) += g.grad;
    });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw std::runtime_error("concat_cols: empty");
    long rows = parts[0].rows(), cols = 0;
    for (const auto& p : parts) {
        if (p.rows() != rows) throw std::runtime_error("concat_cols: row mismatch");
        cols += p.cols();
    }
    Mat out(rows, cols);
    long off = 0;
    std::vector<std::shared_ptr<Node>> nodes;
    std::vector<long> offsets, widths;
    for (const auto& p : parts) {
        out.middleCols(off, p.cols()) = p.value();
        nodes.push_back(p.node());
        offsets.push_back(off);
        widths.push_back(p.cols());
        off += p.cols();
    }
    return make_op(std::move(out), parts, [nodes, offsets, widths](Node& n) {
        for (size_t i = 0; i < nodes.size(); ++i)
            accumulate(nodes[i], n.grad.middleCols(offsets[i], widths[i]));
    });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw std::runtime_error("concat_rows: empty");
    long cols = parts[0].cols(), rows = 0;
    for (const auto& p : parts) {
        if (p.cols() != cols) throw std::runtime_error("concat_rows: col mismatch");
        rows += p.rows();
    }
    Mat out(rows, cols);
    long off = 0;
    std::vector<std::shared_ptr<Node>> nodes;
    std::vector<long> offsets, heights;
    for (const auto& p : parts) {
        out.middleRows(off, p.rows()) = p.value();
        nodes.push_back(p.node());
        offsets.push_back(off);
        heights.push_back(p.rows());
        off += p.rows();
    }
    return make_op(std::move(out), parts, [nodes, offsets, heights](Node& n) {
        for (size_t i = 0; i < nodes.size(); ++i)
            accumulate(nodes[i], n.grad.middleRows(offsets[i], heights[i]));
    });
}

Tensor add_row_broadcast(const Tensor& a, const Tensor& row) {
    if (row.rows() != 1 || row.cols() != a.cols())
        throw std::runtime_error("add_row_broadcast: row must be 1 x cols(a)");
    auto an = a.node(), rn = row.node();
    Mat out = a.value();
    out.rowwise() += Eigen::RowVectorXd(row.value().row(0));
    return make_op(std::move(out), {a, row}, [an, rn](Node& n) {
        accumulate(an, n.grad);
        accumulate(rn, n.grad.colwise().sum());
    });
}

Tensor softmax_rows(const Tensor& a) {
    Mat y = a.value();
    for (long i = 0; i < y.rows(); ++i) {
        double m = y.row(i).maxCoeff();
        y.row(i) = (y.row(i).array() - m).exp();
        y.row(i) /= y.row(i).sum();
    }
    auto an = a.node();
    auto yn = std::make_shared<Mat>(y);
    return make_op(std::move(y), {a}, [an, yn](Node& n) {
        Mat dx = n.grad.cwiseProduct(*yn);
        Eigen::VectorXd rowdot = dx.rowwise().sum();
        dx -= rowdot.asDiagonal() * (*yn);
        accumulate(an, dx);
    });
}

Tensor relu(const Tensor& a) {
    auto an = a.node();
    Mat out = a.value().cwiseMax(0.0);
    return make_op(std::move(out), {a}, [an](Node& n) {
        Mat mask = (an->value.array() > 0.0).cast<double>();
        accumulate(an, n.grad.cwiseProduct(mask));
    });
}

Tensor sigmoid(const Tensor& a) {
    Mat y = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
    auto an = a.node();
    auto yn = std::make_shared<Mat>(y);
    return make_op(std::move(y), {a}, [an, yn](Node& n) {
        Mat d = yn->array() * (1.0 - yn->array());
        accumulate(an, n.grad.cwiseProduct(d));
    });
}

Tensor swish(const Tensor& a) {
    Mat s = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
    Mat y = a.value().cwiseProduct(s);
    auto an = a.node();
    auto sn = std::make_shared<Mat>(std::move(s));
    return make_op(std::move(y), {a}, [an, sn](Node& n) {
        // d/dx x*s(x) = s + x*s*(1-s)
        Mat d = sn->array() + an->value.array() * sn->array() * (1.0 - sn->array());
        accumulate(an, n.grad.cwiseProduct(d));
    });
}

Tensor tanh_t(const Tensor& a) {
    Mat y = a.value().array().tanh().matrix();
    auto an = a.node();
    auto yn = std::make_shared<Mat>(y);
    return make_op(std::move(y), {a}, [an, yn](Node& n) {
        Mat d = 1.0 - yn->array().square();
        accumulate(an, n.grad.cwiseProduct(d));
    });
}

Tensor log1p_t(const Tensor& a) {
    Mat y = a.value().array().log1p().matrix();
    auto an = a.node();
    return make_op(std::move(y), {a}, [an](Node& n) {
        Mat d = 1.0 / (1.0 + an->value.array());
        accumulate(an, n.grad.cwiseProduct(d));
    });
}

Tensor layer_norm_rows(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
    const long D = x.cols();
    if (gamma.cols() != D || beta.cols() != D || gamma.rows() != 1 || beta.rows() != 1)
        throw std::runtime_error("layer_norm_rows: gamma/beta must be 1 x D");
    Mat xhat(x.rows(), D);
    Eigen::VectorXd inv_std(x.rows());
    for (long i = 0; i < x.rows(); ++i) {
        double mean = x.value().row(i).mean();
        double var = (x.value().row(i).array() - mean).square().mean();
        double is = 1.0 / std::sqrt(var + eps);
        xhat.row(i) = (x.value().row(i).array() - mean) * is;
        inv_std(i) = is;
    }
    Mat y = xhat;
    for (long i = 0; i < y.rows(); ++i)
        y.row(i) = y.row(i).cwiseProduct(gamma.value().row(0)) + beta.value().row(0);

    auto xn = x.node(), gn = gamma.node(), bn = beta.node();
    auto xhat_p = std::make_shared<Mat>(std::move(xhat));
    auto istd_p = std::make_shared<Eigen::VectorXd>(std::move(inv_std));
    return make_op(std::move(y), {x, gamma, beta}, [xn, gn, bn, xhat_p, istd_p](Node& n) {
        const Mat& xh = *xhat_p;
        accumulate(gn, n.grad.cwiseProduct(xh).colwise().sum());
        accumulate(bn, n.grad.colwise().sum());
        if (!xn->requires_grad) return;
        const long D = xh.cols();
        Mat dx(xh.rows(), D);
        for (long i = 0; i < xh.rows(); ++i) {
            Eigen::RowVectorXd gy = n.grad.row(i).cwiseProduct(gn->value.row(0));
            double m1 = gy.mean();
            double m2 = gy.cwiseProduct(xh.row(i)).mean();
            dx.row(i) = ((gy.array() - m1) - xh.row(i).array() * m2) * (*istd_p)(i);
        }
        accumulate(xn, dx);
    });
}

namespace {

// im2col for same-padded 1D conv: out row t holds x[t-k/2 .. t+k/2] tap-major.
Mat im2col_same(const Mat& x, int kernel) {
    const long T = x.rows(), C = x.cols();
    const int half = kernel / 2;
    Mat col = Mat::Zero(T, kernel * C);
    for (int j = 0; j < kernel; ++j) {
        const long shift = j - half;
        const long lo = std::max<long>(0, -shift);
        const long hi = std::min<long>(T, T - shift);
        if (hi > lo) col.block(lo, j * C, hi - lo, C) = x.block(lo + shift, 0, hi - lo, C);
    }
    return col;
}

void col2im_same_add(Mat& dx, const Mat& dcol, int kernel) {
    const long T = dx.rows(), C = dx.cols();
    const int half = kernel / 2;
    for (int j = 0; j < kernel; ++j) {
        const long shift = j - half;
        const long lo = std::max<long>(0, -shift);
        const long hi = std::min<long>(T, T - shift);
        if (hi > lo) dx.block(lo + shift, 0, hi - lo, C) += dcol.block(lo, j * C, hi - lo, C);
    }
}

}  // namespace

Tensor conv1d_same(const Tensor& x, const Tensor& w, const Tensor& bias, int kernel) {
    if (kernel < 1 || kernel % 2 == 0) throw std::runtime_error("conv1d_same: kernel must be odd");
    const long C = x.cols();
    if (w.rows() != kernel * C) throw std::runtime_error("conv1d_same: weight rows != k*Cin");
    if (bias.rows() != 1 || bias.cols() != w.cols())
        throw std::runtime_error("conv1d_same: bias must be 1 x Cout");
    Mat col = im2col_same(x.value(), kernel);
    Mat out = col * w.value();
    out.rowwise() += Eigen::RowVectorXd(bias.value().row(0));
    auto xn = x.node(), wn = w.node(), bn = bias.node();
    auto col_p = std::make_shared<Mat>(std::move(col));
    return make_op(std::move(out), {x, w, bias}, [xn, wn, bn, col_p, kernel](Node& n) {
        accumulate(wn, col_p->transpose() * n.grad);
        accumulate(bn, n.grad.colwise().sum());
        if (!xn->requires_grad) return;
        Mat dcol = n.grad * wn->value.transpose();
        Mat dx = Mat::Zero(xn->value.rows(), xn->value.cols());
        col2im_same_add(dx, dcol, kernel);
        accumulate(xn, dx);
    });
}

Tensor depthwise_conv1d_same(const Tensor& x, const Tensor& w, int kernel) {
    if (kernel < 1 || kernel % 2 == 0)
        throw std::runtime_error("depthwise_conv1d_same: kernel must be odd");
    const long T = x.rows(), C = x.cols();
    if (w.rows() != kernel || w.cols() != C)
        throw std::runtime_error("depthwise_conv1d_same: weight must be k x C");
    const int half = kernel / 2;
    Mat out = Mat::Zero(T, C);
    for (int j = 0; j < kernel; ++j) {
        const long shift = j - half;
        const long lo = std::max<long>(0, -shift);
        const long hi = std::min<long>(T, T - shift);
        if (hi > lo)
            out.block(lo, 0, hi - lo, C) +=
                x.value().block(lo + shift, 0, hi - lo, C) *
                w.value().row(j).asDiagonal();
    }
    auto xn = x.node(), wn = w.node();
    return make_op(std::move(out), {x, w}, [xn, wn, kernel, T, C, half](Node& n) {
        if (wn->requires_grad) {
            wn->ensure_grad();
            for (int j = 0; j < kernel; ++j) {
                const long shift = j - half;
                const long lo = std::max<long>(0, -shift);
                const long hi = std::min<long>(T, T - shift);
                if (hi > lo)
                    wn->grad.row(j) += (xn->value.block(lo + shift, 0, hi - lo, C)
                                            .cwiseProduct(n.grad.block(lo, 0, hi - lo, C)))
                                           .colwise()
                                           .sum();
            }
        }
        if (!xn->requires_grad) return;
        Mat dx = Mat::Zero(T, C);
        for (int j = 0; j < kernel; ++j) {
            const long shift = j - half;
            const long lo = std::max<long>(0, -shift);
            const long hi = std::min<long>(T, T - shift);
            if (hi > lo)
                dx.block(lo + shift, 0, hi - lo, C) +=
                    n.grad.block(lo, 0, hi - lo, C) * wn->value.row(j).asDiagonal();
        }
        accumulate(xn, dx);
    });
}

Tensor embedding_lookup(const Tensor& table, const std::vector<int>& ids) {
    const long K = table.rows(), D = table.cols();
    Mat out(static_cast<long>(ids.size()), D);
    for (size_t t = 0; t < ids.size(); ++t) {
        if (ids[t] < 0 || ids[t] >= K)
            throw std::runtime_error("embedding_lookup: id " + std::to_string(ids[t]) +
                                     " outside inventory of size " + std::to_string(K));
        out.row(static_cast<long>(t)) = table.value().row(ids[t]);
    }
    auto tn = table.node();
    auto ids_p = std::make_shared<std::vector<int>>(ids);
    return make_op(std::move(out), {table}, [tn, ids_p](Node& n) {
        if (!tn->requires_grad) return;
        tn->ensure_grad();
        for (size_t t = 0; t < ids_p->size(); ++t)
            tn->grad.row((*ids_p)[t]) += n.grad.row(static_cast<long>(t));
    });
}

Tensor dropout(const Tensor& x, double p, bool training, Rng& rng) {
    if (!training || p <= 0.0) return x;
    if (p >= 1.0) throw std::runtime_error("dropout: p must be < 1");
    std::bernoulli_distribution keep(1.0 - p);
    Mat mask(x.rows(), x.cols());
    const double inv_keep = 1.0 / (1.0 - p);
    for (long i = 0; i < mask.rows(); ++i)
        for (long j = 0; j < mask.cols(); ++j) mask(i, j) = keep(rng) ? inv_keep : 0.0;
    auto xn = x.node();
    auto mask_p = std::make_shared<Mat>(std::move(mask));
    return make_op(x.value().cwiseProduct(*mask_p), {x}, [xn, mask_p](Node& n) {
        accumulate(xn, n.grad.cwiseProduct(*mask_p));
    });
}

Tensor repeat_rows(const Tensor& x, int factor) {
    if (factor < 1) throw std::runtime_error("repeat_rows: factor must be >= 1");
    const long T = x.rows();
    Mat out(T * factor, x.cols());
    for (long t = 0; t < T; ++t)
        for (int r = 0; r < factor; ++r) out.row(t * factor + r) = x.value().row(t);
    auto xn = x.node();
    return make_op(std::move(out), {x}, [xn, T, factor](Node& n) {
        if (!xn->requires_grad) return;
        Mat dx = Mat::Zero(T, xn->value.cols());
        for (long t = 0; t < T; ++t)
            for (int r = 0; r < factor; ++r) dx.row(t) += n.grad.row(t * factor + r);
        accumulate(xn, dx);
    });
}

Tensor mean_pool_rows(const Tensor& x, int group) {
    if (group < 1) throw std::runtime_error("mean_pool_rows: group must be >= 1");
    if (x.rows() % group != 0) throw std::runtime_error("mean_pool_rows: rows not divisible");
    const long T = x.rows() / group;
    Mat out = Mat::Zero(T, x.cols());
    for (long t = 0; t < T; ++t) {
        for (int r = 0; r < group; ++r) out.row(t) += x.value().row(t * group + r);
        out.row(t) /= group;
    }
    auto xn = x.node();
    return make_op(std::move(out), {x}, [xn, T, group](Node& n) {
        if (!xn->requires_grad) return;
        Mat dx(T * group, xn->value.cols());
        for (long t = 0; t < T; ++t)
            for (int r = 0; r < group; ++r) dx.row(t * group + r) = n.grad.row(t) / group;
        accumulate(xn, dx);
    });
}

Tensor mean_abs_error(const Tensor& pred, const Mat& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw std::runtime_error("mean_abs_error: shape mismatch");
    Mat diff = pred.value() - target;
    const double n_elems = static_cast<double>(diff.size());
    Mat out(1, 1);
    out(0, 0) = diff.cwiseAbs().sum() / n_elems;
    auto pn = pred.node();
    auto sign_p = std::make_shared<Mat>(diff.unaryExpr(
        [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }));
    return make_op(std::move(out), {pred}, [pn, sign_p, n_elems](Node& n) {
        accumulate(pn, (n.grad(0, 0) / n_elems) * (*sign_p));
    });
}

Tensor label_smoothed_cross_entropy(const Tensor& logits, const std::vector<int>& ids,
                                    double alpha) {
    const long T = logits.rows(), K = logits.cols();
    if (static_cast<long>(ids.size()) != T)
        throw std::runtime_error("label_smoothed_cross_entropy: target length mismatch");
    Mat logp(T, K);
    for (long t = 0; t < T; ++t) {
        double m = logits.value().row(t).maxCoeff();
        Eigen::RowVectorXd shifted = logits.value().row(t).array() - m;
        double lse = std::log(shifted.array().exp().sum());
        logp.row(t) = shifted.array() - lse;
    }
    // Smoothing spreads alpha uniformly over all K classes, the true class
    // keeping (1 - alpha) + alpha/K.
    const double off = alpha / static_cast<double>(K);
    const double on = 1.0 - alpha + off;
    double loss = 0.0;
    for (long t = 0; t < T; ++t) {
        if (ids[t] < 0 || ids[t] >= K)
            throw std::runtime_error("label_smoothed_cross_entropy: id out of range");
        loss -= off * logp.row(t).sum() + (on - off) * logp(t, ids[t]);
    }
    loss /= static_cast<double>(T);
    Mat out(1, 1);
    out(0, 0) = loss;
    auto ln = logits.node();
    auto ids_p = std::make_shared<std::vector<int>>(ids);
    auto p_p = std::make_shared<Mat>(logp.array().exp().matrix());
    return make_op(std::move(out), {logits}, [ln, ids_p, p_p, on, off, T](Node& n) {
        if (!ln->requires_grad) return;
        Mat dl = *p_p;
        dl.array() -= off;
        for (long t = 0; t < T; ++t) dl(t, (*ids_p)[t]) -= (on - off);
        accumulate(ln, (n.grad(0, 0) / static_cast<double>(T)) * dl);
    });
}

Mat uniform_fan_in(long rows, long cols, long fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<long>(1, fan_in)));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Mat m(rows, cols);
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j) m(i, j) = dist(rng);
    return m;
}

}  // namespace lipsynth::nn
