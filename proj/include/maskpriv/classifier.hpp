#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "maskpriv/blur.hpp"
#include "maskpriv/errors.hpp"
#include "maskpriv/image.hpp"
#include "maskpriv/rng.hpp"
#include "maskpriv/synth.hpp"

namespace maskpriv {

struct TrainConfig {
    int epochs = 15;
    double split = 0.75; // train fraction
    double learning_rate = 0.01;
    int batch_size = 32;
    std::uint64_t seed = 0;
};

/// Binary-classification metrics with mask as the positive class.
struct Metrics {
    double accuracy = 0.0;
    std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;

    std::uint64_t total() const { return tp + tn + fp + fn; }

    static Metrics from_counts(std::uint64_t tp, std::uint64_t tn, std::uint64_t fp, std::uint64_t fn) {
        Metrics m{0.0, tp, tn, fp, fn};
        const std::uint64_t n = m.total();
        m.accuracy = n ? static_cast<double>(tp + tn) / static_cast<double>(n) : 0.0;
        return m;
    }
};

// ---------------------------------------------------------------------------
// Network: conv 3x3x8 / relu / maxpool 2x2 / conv 3x3x16 / relu /
// maxpool 2x2 / flatten / dense(2) / softmax, on 32x32 RGB crops.
// Convolutions use zero padding so spatial sizes stay 32 -> 16 -> 8.
// Templated on the scalar so the gradient checker can run in double while
// the shipped model stores 32-bit weights.
// ---------------------------------------------------------------------------

template <typename T>
struct Net {
    static constexpr int kInput = 32;
    static constexpr int kC0 = 3, kC1 = 8, kC2 = 16, kK = 3;
    static constexpr int kS1 = kInput / 2;  // 16 after first pool
    static constexpr int kS2 = kInput / 4;  // 8 after second pool
    static constexpr int kFlat = kC2 * kS2 * kS2;
    static constexpr int kClasses = 2;

    std::vector<T> w1, b1, w2, b2, wf, bf;

    Net()
        : w1(kC1 * kC0 * kK * kK), b1(kC1),
          w2(kC2 * kC1 * kK * kK), b2(kC2),
          wf(kClasses * kFlat), bf(kClasses) {}

    /// Glorot-uniform weights, zero biases.
    void init_weights(SplitMix64& rng) {
        auto fill = [&rng](std::vector<T>& w, int fan_in, int fan_out) {
            const double limit = std::sqrt(6.0 / (fan_in + fan_out));
            for (T& v : w)
                v = static_cast<T>(rng.uniform(-limit, limit));
        };
        fill(w1, kC0 * kK * kK, kC1 * kK * kK);
        fill(w2, kC1 * kK * kK, kC2 * kK * kK);
        fill(wf, kFlat, kClasses);
        std::fill(b1.begin(), b1.end(), T(0));
        std::fill(b2.begin(), b2.end(), T(0));
        std::fill(bf.begin(), bf.end(), T(0));
    }

    bool operator==(const Net&) const = default;
};

namespace detail {

template <typename T>
void conv3x3_same(const T* in, int channels_in, int size, const T* w, const T* b,
                  int channels_out, T* out) {
    const int plane = size * size;
    for (int oc = 0; oc < channels_out; ++oc) {
        T* dst = out + oc * plane;
        for (int i = 0; i < plane; ++i)
            dst[i] = b[oc];
        for (int ic = 0; ic < channels_in; ++ic) {
            const T* src = in + ic * plane;
            const T* kw = w + (oc * channels_in + ic) * 9;
            for (int ky = 0; ky < 3; ++ky) {
                for (int kx = 0; kx < 3; ++kx) {
                    const T wv = kw[ky * 3 + kx];
                    const int dy = ky - 1, dx = kx - 1;
                    const int y0 = std::max(0, -dy), y1 = size - std::max(0, dy);
                    const int x0 = std::max(0, -dx), x1 = size - std::max(0, dx);
                    for (int y = y0; y < y1; ++y) {
                        T* drow = dst + y * size;
                        const T* srow = src + (y + dy) * size + dx;
                        for (int x = x0; x < x1; ++x)
                            drow[x] += wv * srow[x];
                    }
                }
            }
        }
    }
}

/// Scatter-add counterpart of conv3x3_same for input gradients.
template <typename T>
void conv3x3_same_input_grad(const T* dout, int channels_out, int size, const T* w,
                             int channels_in, T* din) {
    const int plane = size * size;
    std::fill(din, din + channels_in * plane, T(0));
    for (int oc = 0; oc < channels_out; ++oc) {
        const T* dsrc = dout + oc * plane;
        for (int ic = 0; ic < channels_in; ++ic) {
            T* ddst = din + ic * plane;
            const T* kw = w + (oc * channels_in + ic) * 9;
            for (int ky = 0; ky < 3; ++ky) {
                for (int kx = 0; kx < 3; ++kx) {
                    const T wv = kw[ky * 3 + kx];
                    const int dy = ky - 1, dx = kx - 1;
                    const int y0 = std::max(0, -dy), y1 = size - std::max(0, dy);
                    const int x0 = std::max(0, -dx), x1 = size - std::max(0, dx);
                    for (int y = y0; y < y1; ++y) {
                        const T* drow = dsrc + y * size;
                        T* srow = ddst + (y + dy) * size + dx;
                        for (int x = x0; x < x1; ++x)
                            srow[x] += wv * drow[x];
                    }
                }
            }
        }
    }
}

template <typename T>
void conv3x3_same_weight_grad(const T* dout, int channels_out, int size, const T* in,
                              int channels_in, T* dw, T* db) {
    const int plane = size * size;
    for (int oc = 0; oc < channels_out; ++oc) {
        const T* dsrc = dout + oc * plane;
        T acc_b = T(0);
        for (int i = 0; i < plane; ++i)
            acc_b += dsrc[i];
        db[oc] += acc_b;
        for (int ic = 0; ic < channels_in; ++ic) {
            const T* src = in + ic * plane;
            T* kw = dw + (oc * channels_in + ic) * 9;
            for (int ky = 0; ky < 3; ++ky) {
                for (int kx = 0; kx < 3; ++kx) {
                    const int dy = ky - 1, dx = kx - 1;
                    const int y0 = std::max(0, -dy), y1 = size - std::max(0, dy);
                    const int x0 = std::max(0, -dx), x1 = size - std::max(0, dx);
                    T acc = T(0);
                    for (int y = y0; y < y1; ++y) {
                        const T* drow = dsrc + y * size;
                        const T* srow = src + (y + dy) * size + dx;
                        for (int x = x0; x < x1; ++x)
                            acc += drow[x] * srow[x];
                    }
                    kw[ky * 3 + kx] += acc;
                }
            }
        }
    }
}

template <typename T>
void relu_inplace(T* v, int n) {
    for (int i = 0; i < n; ++i)
        if (v[i] < T(0))
            v[i] = T(0);
}

template <typename T>
void maxpool2(const T* in, int channels, int size, T* out, std::int32_t* argmax) {
    const int half = size / 2;
    for (int c = 0; c < channels; ++c) {
        const T* src = in + c * size * size;
        T* dst = out + c * half * half;
        std::int32_t* amax = argmax + c * half * half;
        for (int y = 0; y < half; ++y) {
            for (int x = 0; x < half; ++x) {
                const int base = (2 * y) * size + 2 * x;
                const int cand[4] = {base, base + 1, base + size, base + size + 1};
                int best = 0;
                for (int i = 1; i < 4; ++i)
                    if (src[cand[i]] > src[cand[best]])
                        best = i;
                dst[y * half + x] = src[cand[best]];
                amax[y * half + x] = cand[best];
            }
        }
    }
}

template <typename T>
void softmax2(const T* logits, T* probs) {
    const T m = std::max(logits[0], logits[1]);
    const T e0 = std::exp(logits[0] - m);
    const T e1 = std::exp(logits[1] - m);
    const T sum = e0 + e1;
    probs[0] = e0 / sum;
    probs[1] = e1 / sum;
}

template <typename T>
struct NetWorkspace {
    using N = Net<T>;
    std::vector<T> a1, p1, a2, p2;
    std::vector<std::int32_t> idx1, idx2;
    T logits[N::kClasses];
    T probs[N::kClasses];
    // backward scratch
    std::vector<T> d2, d1;

    NetWorkspace()
        : a1(N::kC1 * N::kInput * N::kInput), p1(N::kC1 * N::kS1 * N::kS1),
          a2(N::kC2 * N::kS1 * N::kS1), p2(N::kFlat),
          idx1(N::kC1 * N::kS1 * N::kS1), idx2(N::kFlat),
          d2(N::kC2 * N::kS1 * N::kS1), d1(N::kC1 * N::kInput * N::kInput) {}
};

template <typename T>
void net_forward(const Net<T>& net, const T* x, NetWorkspace<T>& ws) {
    using N = Net<T>;
    conv3x3_same(x, N::kC0, N::kInput, net.w1.data(), net.b1.data(), N::kC1, ws.a1.data());
    relu_inplace(ws.a1.data(), static_cast<int>(ws.a1.size()));
    maxpool2(ws.a1.data(), N::kC1, N::kInput, ws.p1.data(), ws.idx1.data());
    conv3x3_same(ws.p1.data(), N::kC1, N::kS1, net.w2.data(), net.b2.data(), N::kC2, ws.a2.data());
    relu_inplace(ws.a2.data(), static_cast<int>(ws.a2.size()));
    maxpool2(ws.a2.data(), N::kC2, N::kS1, ws.p2.data(), ws.idx2.data());
    for (int c = 0; c < N::kClasses; ++c) {
        T acc = net.bf[c];
        const T* w = net.wf.data() + c * N::kFlat;
        for (int i = 0; i < N::kFlat; ++i)
            acc += w[i] * ws.p2[i];
        ws.logits[c] = acc;
    }
    softmax2(ws.logits, ws.probs);
}

template <typename T>
struct NetGrads {
    std::vector<T> w1, b1, w2, b2, wf, bf;

    NetGrads() { zero_like(); }

    void zero_like() {
        using N = Net<T>;
        w1.assign(N::kC1 * N::kC0 * N::kK * N::kK, T(0));
        b1.assign(N::kC1, T(0));
        w2.assign(N::kC2 * N::kC1 * N::kK * N::kK, T(0));
        b2.assign(N::kC2, T(0));
        wf.assign(N::kClasses * N::kFlat, T(0));
        bf.assign(N::kClasses, T(0));
    }
};

/// Cross-entropy loss for one sample; accumulates parameter gradients.
template <typename T>
double net_backward(const Net<T>& net, const T* x, int label, NetWorkspace<T>& ws,
                    NetGrads<T>& g) {
    using N = Net<T>;
    net_forward(net, x, ws);
    const double loss = -std::log(std::max(static_cast<double>(ws.probs[label]), 1e-300));

    T dlogits[N::kClasses];
    for (int c = 0; c < N::kClasses; ++c)
        dlogits[c] = ws.probs[c] - (c == label ? T(1) : T(0));

    // dense layer
    std::vector<T> dflat(N::kFlat, T(0));
    for (int c = 0; c < N::kClasses; ++c) {
        g.bf[c] += dlogits[c];
        T* gw = g.wf.data() + c * N::kFlat;
        const T* w = net.wf.data() + c * N::kFlat;
        const T d = dlogits[c];
        for (int i = 0; i < N::kFlat; ++i) {
            gw[i] += d * ws.p2[i];
            dflat[i] += d * w[i];
        }
    }

    // pool2 -> relu2
    std::fill(ws.d2.begin(), ws.d2.end(), T(0));
    for (int c = 0; c < N::kC2; ++c) {
        const int plane_out = N::kS2 * N::kS2;
        for (int i = 0; i < plane_out; ++i) {
            const std::int32_t src = ws.idx2[c * plane_out + i];
            ws.d2[c * N::kS1 * N::kS1 + src] = dflat[c * plane_out + i];
        }
    }
    for (std::size_t i = 0; i < ws.d2.size(); ++i)
        if (ws.a2[i] <= T(0))
            ws.d2[i] = T(0);

    // conv2
    conv3x3_same_weight_grad(ws.d2.data(), N::kC2, N::kS1, ws.p1.data(), N::kC1,
                             g.w2.data(), g.b2.data());
    std::vector<T> dp1(N::kC1 * N::kS1 * N::kS1);
    conv3x3_same_input_grad(ws.d2.data(), N::kC2, N::kS1, net.w2.data(), N::kC1, dp1.data());

    // pool1 -> relu1
    std::fill(ws.d1.begin(), ws.d1.end(), T(0));
    for (int c = 0; c < N::kC1; ++c) {
        const int plane_out = N::kS1 * N::kS1;
        for (int i = 0; i < plane_out; ++i) {
            const std::int32_t src = ws.idx1[c * plane_out + i];
            ws.d1[c * N::kInput * N::kInput + src] = dp1[c * plane_out + i];
        }
    }
    for (std::size_t i = 0; i < ws.d1.size(); ++i)
        if (ws.a1[i] <= T(0))
            ws.d1[i] = T(0);

    // conv1
    conv3x3_same_weight_grad(ws.d1.data(), N::kC1, N::kInput, x, N::kC0,
                             g.w1.data(), g.b1.data());
    return loss;
}

/// Mean loss over a batch of rows; optionally accumulates mean gradients.
template <typename T>
double net_batch_loss(const Net<T>& net, const T* rows, std::size_t row_stride,
                      const std::uint8_t* labels, const std::size_t* order, int count,
                      NetWorkspace<T>& ws, NetGrads<T>* grads) {
    double loss_sum = 0.0;
    for (int i = 0; i < count; ++i) {
        const std::size_t s = order ? order[i] : static_cast<std::size_t>(i);
        const T* x = rows + s * row_stride;
        if (grads) {
            loss_sum += net_backward(net, x, labels[s], ws, *grads);
        } else {
            net_forward(net, x, ws);
            loss_sum += -std::log(std::max(static_cast<double>(ws.probs[labels[s]]), 1e-300));
        }
    }
    return loss_sum / count;
}

inline std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t h = 0xCBF29CE484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x00000100000001B3ULL;
    }
    return h;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Public classifier surface
// ---------------------------------------------------------------------------

inline constexpr int kClassifierInputSize = Net<float>::kInput;

struct ClassifierModel {
    Net<float> net;
    int input_size = kClassifierInputSize;

    bool operator==(const ClassifierModel&) const = default;
};

struct Prediction {
    MaskLabel label = MaskLabel::no_mask;
    double score = 0.0; // winning class probability
};

/// Crop the face, bilinear-resize to input_size x input_size and scale the
/// channels to [0, 1]. Layout is channel-major (3 x size x size).
inline std::vector<float> preprocess(const Image& image, const FaceRegion& face,
                                     int input_size = kClassifierInputSize) {
    require_region_inside(face, image, "preprocess");
    if (face.w < 2 || face.h < 2)
        throw InvalidParameter("preprocess: degenerate face region");
    std::vector<float> out(static_cast<std::size_t>(3) * input_size * input_size);
    const double sx = static_cast<double>(face.w) / input_size;
    const double sy = static_cast<double>(face.h) / input_size;
    for (int oy = 0; oy < input_size; ++oy) {
        const double fy = (oy + 0.5) * sy - 0.5;
        int y0 = static_cast<int>(std::floor(fy));
        const double ty = fy - y0;
        const int y1 = std::clamp(y0 + 1, 0, face.h - 1);
        y0 = std::clamp(y0, 0, face.h - 1);
        for (int ox = 0; ox < input_size; ++ox) {
            const double fx = (ox + 0.5) * sx - 0.5;
            int x0 = static_cast<int>(std::floor(fx));
            const double tx = fx - x0;
            const int x1 = std::clamp(x0 + 1, 0, face.w - 1);
            x0 = std::clamp(x0, 0, face.w - 1);
            for (int c = 0; c < 3; ++c) {
                const double p00 = image.at(face.x + x0, face.y + y0, c);
                const double p01 = image.at(face.x + x1, face.y + y0, c);
                const double p10 = image.at(face.x + x0, face.y + y1, c);
                const double p11 = image.at(face.x + x1, face.y + y1, c);
                const double v = (1.0 - ty) * ((1.0 - tx) * p00 + tx * p01) +
                                 ty * ((1.0 - tx) * p10 + tx * p11);
                out[(static_cast<std::size_t>(c) * input_size + oy) * input_size + ox] =
                    static_cast<float>(v / 255.0);
            }
        }
    }
    return out;
}

inline Prediction predict(const ClassifierModel& model, std::span<const float> input) {
    if (input.size() != static_cast<std::size_t>(3) * model.input_size * model.input_size)
        throw InvalidParameter("predict: input tensor shape mismatch");
    detail::NetWorkspace<float> ws;
    detail::net_forward(model.net, input.data(), ws);
    Prediction p;
    if (ws.probs[1] > ws.probs[0]) {
        p.label = MaskLabel::mask;
        p.score = ws.probs[1];
    } else {
        p.label = MaskLabel::no_mask; // ties go to no_mask
        p.score = ws.probs[0];
    }
    return p;
}

namespace detail {

inline std::vector<float> sample_tensor(const LabeledSample& s, std::optional<BlurFactor> blur,
                                        int input_size) {
    if (blur) {
        const Image blurred = blur_region(s.image, s.face, *blur);
        return preprocess(blurred, s.face, input_size);
    }
    return preprocess(s.image, s.face, input_size);
}

} // namespace detail

struct TrainResult {
    ClassifierModel model;
    Metrics holdout;
    std::vector<double> epoch_loss; // mean training loss per epoch
};

/// Train on a deterministic shuffled split. When blur is given every face is
/// blurred before preprocessing, on both sides of the split, mirroring a
/// deployment where the classifier only ever sees anonymized crops.
/// Two calls with identical samples and config produce identical weights.
inline TrainResult train(const std::vector<LabeledSample>& samples, const TrainConfig& config,
                         std::optional<BlurFactor> blur = {}) {
    if (config.epochs < 1 || config.batch_size < 1 ||
        !(config.split > 0.0 && config.split < 1.0) || !(config.learning_rate > 0.0))
        throw InvalidParameter("train: invalid config");
    std::size_t n_mask = 0, n_clear = 0;
    for (const LabeledSample& s : samples)
        (s.label == MaskLabel::mask ? n_mask : n_clear)++;
    if (n_mask < 2 || n_clear < 2)
        throw InvalidDataset("train: need at least 2 samples of each class");

    const int input = kClassifierInputSize;
    const std::size_t n = samples.size();
    const std::size_t row = static_cast<std::size_t>(3) * input * input;
    std::vector<float> xs(n * row);
    std::vector<std::uint8_t> ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto t = detail::sample_tensor(samples[i], blur, input);
        std::copy(t.begin(), t.end(), xs.begin() + i * row);
        ys[i] = static_cast<std::uint8_t>(samples[i].label);
    }

    SplitMix64 rng(derive_seed(config.seed, 0x747261696EULL));
    ClassifierModel model;
    model.net.init_weights(rng);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i)
        order[i] = i;
    auto shuffle = [&rng](std::vector<std::size_t>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
    };
    shuffle(order);
    std::size_t n_train = static_cast<std::size_t>(std::llround(config.split * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    std::vector<std::size_t> train_idx(order.begin(), order.begin() + n_train);
    const std::vector<std::size_t> test_idx(order.begin() + n_train, order.end());

    detail::NetWorkspace<float> ws;
    detail::NetGrads<float> grads;
    TrainResult result;
    result.epoch_loss.reserve(config.epochs);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle(train_idx);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < train_idx.size(); start += config.batch_size) {
            const int count = static_cast<int>(std::min<std::size_t>(config.batch_size,
                                                                     train_idx.size() - start));
            grads.zero_like();
            loss_sum += count * detail::net_batch_loss(model.net, xs.data(), row, ys.data(),
                                                       train_idx.data() + start, count, ws, &grads);
            const float step = static_cast<float>(config.learning_rate / count);
            auto apply = [step](std::vector<float>& w, const std::vector<float>& g) {
                for (std::size_t i = 0; i < w.size(); ++i)
                    w[i] -= step * g[i];
            };
            apply(model.net.w1, grads.w1);
            apply(model.net.b1, grads.b1);
            apply(model.net.w2, grads.w2);
            apply(model.net.b2, grads.b2);
            apply(model.net.wf, grads.wf);
            apply(model.net.bf, grads.bf);
        }
        result.epoch_loss.push_back(loss_sum / static_cast<double>(train_idx.size()));
    }

    std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t s : test_idx) {
        detail::net_forward(model.net, xs.data() + s * row, ws);
        const bool pred_mask = ws.probs[1] > ws.probs[0];
        const bool true_mask = ys[s] == 1;
        if (pred_mask && true_mask) ++tp;
        else if (pred_mask) ++fp;
        else if (true_mask) ++fn;
        else ++tn;
    }
    result.holdout = Metrics::from_counts(tp, tn, fp, fn);
    result.model = std::move(model);
    return result;
}

/// Accuracy and confusion counts over a sample list, applying the same
/// blur/preprocess path as training.
inline Metrics evaluate(const ClassifierModel& model, const std::vector<LabeledSample>& samples,
                        std::optional<BlurFactor> blur = {}) {
    if (samples.empty())
        throw InvalidParameter("evaluate: empty sample list");
    std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
    for (const LabeledSample& s : samples) {
        const auto t = detail::sample_tensor(s, blur, model.input_size);
        const Prediction p = predict(model, t);
        const bool pred_mask = p.label == MaskLabel::mask;
        const bool true_mask = s.label == MaskLabel::mask;
        if (pred_mask && true_mask) ++tp;
        else if (pred_mask) ++fp;
        else if (true_mask) ++fn;
        else ++tn;
    }
    return Metrics::from_counts(tp, tn, fp, fn);
}

// ---------------------------------------------------------------------------
// Persistence: text magic and architecture lines, then raw little-endian
// float32 tensors in layer order. load(save(m)) == m bitwise.
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr const char* kModelMagic = "MASKPRIV-MODEL 1";
inline constexpr const char* kModelArch =
    "arch input=32x32x3 conv1=8x3x3x3 relu pool=max2x2 conv2=16x8x3x3 relu pool=max2x2 "
    "flatten dense=2x1024 softmax classes=no_mask,mask";

inline void append_f32_le(std::string& out, const std::vector<float>& v) {
    for (float f : v) {
        const std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
        out.push_back(static_cast<char>(bits & 0xFF));
        out.push_back(static_cast<char>((bits >> 8) & 0xFF));
        out.push_back(static_cast<char>((bits >> 16) & 0xFF));
        out.push_back(static_cast<char>((bits >> 24) & 0xFF));
    }
}

inline void read_f32_le(const std::string& data, std::size_t& pos, std::vector<float>& v) {
    if (pos + v.size() * 4 > data.size())
        throw IoError("model: truncated weight payload");
    for (float& f : v) {
        const auto b = [&](int i) {
            return static_cast<std::uint32_t>(static_cast<unsigned char>(data[pos + i]));
        };
        const std::uint32_t bits = b(0) | (b(1) << 8) | (b(2) << 16) | (b(3) << 24);
        f = std::bit_cast<float>(bits);
        pos += 4;
    }
}

} // namespace detail

inline std::string serialize_model(const ClassifierModel& model) {
    std::string out;
    out += detail::kModelMagic;
    out += '\n';
    out += detail::kModelArch;
    out += '\n';
    detail::append_f32_le(out, model.net.w1);
    detail::append_f32_le(out, model.net.b1);
    detail::append_f32_le(out, model.net.w2);
    detail::append_f32_le(out, model.net.b2);
    detail::append_f32_le(out, model.net.wf);
    detail::append_f32_le(out, model.net.bf);
    return out;
}

inline ClassifierModel deserialize_model(const std::string& data) {
    const auto read_line = [&data](std::size_t& pos) {
        const std::size_t nl = data.find('\n', pos);
        if (nl == std::string::npos)
            throw IoError("model: malformed header");
        std::string line = data.substr(pos, nl - pos);
        pos = nl + 1;
        return line;
    };
    std::size_t pos = 0;
    if (read_line(pos) != detail::kModelMagic)
        throw IoError("model: bad magic");
    if (read_line(pos) != detail::kModelArch)
        throw IoError("model: unsupported architecture descriptor");
    ClassifierModel model;
    detail::read_f32_le(data, pos, model.net.w1);
    detail::read_f32_le(data, pos, model.net.b1);
    detail::read_f32_le(data, pos, model.net.w2);
    detail::read_f32_le(data, pos, model.net.b2);
    detail::read_f32_le(data, pos, model.net.wf);
    detail::read_f32_le(data, pos, model.net.bf);
    if (pos != data.size())
        throw IoError("model: trailing bytes after weights");
    return model;
}

inline void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("model: cannot open " + path.string() + " for writing");
    const std::string data = serialize_model(model);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out)
        throw IoError("model: write failed for " + path.string());
}

inline ClassifierModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("model: cannot open " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_model(data);
}

/// FNV-1a digest of the serialized model bytes.
inline std::uint64_t model_digest(const ClassifierModel& model) {
    const std::string data = serialize_model(model);
    return detail::fnv1a64(data.data(), data.size());
}

/// Checksum binding a model (or the ground-truth stand-in when absent) to a
/// blur factor, embedded in anonymized streams so the central service can
/// reject a mismatched deployment.
inline std::uint64_t config_checksum(std::optional<std::uint64_t> digest, BlurFactor f) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    if (digest) {
        h = detail::fnv1a64(&*digest, sizeof(*digest), h);
    } else {
        static constexpr char tag[] = "ground-truth";
        h = detail::fnv1a64(tag, sizeof(tag) - 1, h);
    }
    const std::uint64_t fbits = std::bit_cast<std::uint64_t>(f.value);
    return detail::fnv1a64(&fbits, sizeof(fbits), h);
}

} // namespace maskpriv
