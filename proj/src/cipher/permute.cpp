#include "cipher/permute.hpp"

#include <memory>
#include <stdexcept>

namespace cipher {

using ndkit::Tensor;
using ndkit::Var;

namespace {

void check_key(const PermutationKey& key, int expected, const char* what) {
  if (key.length() != expected) {
    throw std::invalid_argument(std::string(what) + ": key length " +
                                std::to_string(key.length()) + " does not match L=" +
                                std::to_string(expected));
  }
  if (!is_bijection(key.alpha)) {
    throw std::invalid_argument(std::string(what) + ": key is not a bijection");
  }
}

/// Gather channels of a [c, plane] block: out channel i = in channel alpha[i].
void permute_channels(const double* in, double* out, const std::vector<int>& alpha,
                      int64_t plane) {
  const int c = static_cast<int>(alpha.size());
  for (int i = 0; i < c; ++i) {
    const double* src = in + static_cast<int64_t>(alpha[static_cast<size_t>(i)]) * plane;
    std::copy(src, src + plane, out + static_cast<int64_t>(i) * plane);
  }
}

}  // namespace

Tensor encrypt_cp(const Tensor& x, const PermutationKey& key) {
  if (x.rank() != 3 && x.rank() != 4) {
    throw std::invalid_argument("encrypt_cp: expected [c,h,w] or [b,c,h,w], got " +
                                ndkit::shape_str(x.shape));
  }
  const int batch = x.rank() == 4 ? x.dim(0) : 1;
  const int c = x.rank() == 4 ? x.dim(1) : x.dim(0);
  const int64_t plane = x.numel() / (static_cast<int64_t>(batch) * c);
  check_key(key, c, "encrypt_cp");
  Tensor out(x.shape);
  for (int b = 0; b < batch; ++b) {
    const int64_t off = static_cast<int64_t>(b) * c * plane;
    permute_channels(x.data.data() + off, out.data.data() + off, key.alpha, plane);
  }
  return out;
}

Tensor encrypt_shf(const Tensor& img, int block, const PermutationKey& key) {
  if (img.rank() != 3) {
    throw std::invalid_argument("encrypt_shf: expected [c,h,w], got " + ndkit::shape_str(img.shape));
  }
  const int c = img.dim(0), h = img.dim(1), w = img.dim(2);
  if (block < 1 || h % block != 0 || w % block != 0) {
    throw std::invalid_argument("encrypt_shf: spatial dims " + ndkit::shape_str(img.shape) +
                                " not divisible by block size " + std::to_string(block));
  }
  check_key(key, c * block * block, "encrypt_shf");

  Tensor out(img.shape);
  const int m = block;
  std::vector<double> flat(static_cast<size_t>(key.length()));
  std::vector<double> shuffled(static_cast<size_t>(key.length()));
  for (int by = 0; by < h / m; ++by) {
    for (int bx = 0; bx < w / m; ++bx) {
      // flatten channel-major, then row-major within the block
      int l = 0;
      for (int ci = 0; ci < c; ++ci) {
        for (int yy = 0; yy < m; ++yy) {
          for (int xx = 0; xx < m; ++xx, ++l) {
            flat[static_cast<size_t>(l)] = img.at3(ci, by * m + yy, bx * m + xx);
          }
        }
      }
      for (int i = 0; i < key.length(); ++i) {
        shuffled[static_cast<size_t>(i)] = flat[static_cast<size_t>(key.alpha[static_cast<size_t>(i)])];
      }
      l = 0;
      for (int ci = 0; ci < c; ++ci) {
        for (int yy = 0; yy < m; ++yy) {
          for (int xx = 0; xx < m; ++xx, ++l) {
            out.at3(ci, by * m + yy, bx * m + xx) = shuffled[static_cast<size_t>(l)];
          }
        }
      }
    }
  }
  return out;
}

Tensor encrypt(const Tensor& x, const KeySpec& spec, const PermutationKey& key) {
  spec.validate();
  if (spec.kind == Kind::CP) return encrypt_cp(x, key);
  return encrypt_shf(x, spec.block, key);
}

Tensor decrypt(const Tensor& x_enc, const KeySpec& spec, const PermutationKey& key) {
  return encrypt(x_enc, spec, invert_key(key));
}

Var channel_permute(const Var& x, const PermutationKey& key) {
  Tensor out = encrypt_cp(x->value, key);
  auto inverse = std::make_shared<PermutationKey>(invert_key(key));
  return ndkit::make_op(std::move(out), {x}, [inverse](ndkit::Node& node) {
    Var p = node.parents[0];
    ndkit::ensure_grad(*p);
    const Tensor upstream_inverse = encrypt_cp(node.grad, *inverse);
    const int64_t n = upstream_inverse.numel();
    for (int64_t i = 0; i < n; ++i) {
      p->grad.data[static_cast<size_t>(i)] += upstream_inverse.data[static_cast<size_t>(i)];
    }
  }, "channel_permute");
}

}  // namespace cipher
