#pragma once

#include "cipher/key.hpp"
#include "ndkit/autograd.hpp"
#include "ndkit/tensor.hpp"

namespace cipher {

/// Channel permutation: output channel i equals input channel alpha[i] at
/// every spatial position. Accepts [c,h,w] or [b,c,h,w].
ndkit::Tensor encrypt_cp(const ndkit::Tensor& x, const PermutationKey& key);

/// Block-wise shuffle of an image: every MxM block is flattened channel-major
/// then row-major, permuted with the same key, and reshaped back.
ndkit::Tensor encrypt_shf(const ndkit::Tensor& img, int block, const PermutationKey& key);

ndkit::Tensor encrypt(const ndkit::Tensor& x, const KeySpec& spec, const PermutationKey& key);
ndkit::Tensor decrypt(const ndkit::Tensor& x_enc, const KeySpec& spec, const PermutationKey& key);

/// Graph version of encrypt_cp; the backward pass routes gradients through
/// the inverse permutation.
ndkit::Var channel_permute(const ndkit::Var& x, const PermutationKey& key);

}  // namespace cipher
