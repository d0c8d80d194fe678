#pragma once

#include <filesystem>
#include <iosfwd>

#include "fashionista/model.h"

namespace fashionista {

/// Binary model file, all integers and doubles little-endian:
///
///   magic        8 bytes "FSHM0001"
///   dims         6 x u64: F, K, L, N, #items, #users
///   item ids     #items x (u32 byte length + UTF-8 bytes)
///   user ids     #users x (u32 byte length + UTF-8 bytes)
///   epochs       (N+1) x i64 boundaries, then N x (u32 length + label bytes)
///   parameters   f64 blocks, row-major, in this order:
///                E (K x F), eta (N x K), beta (#items), beta(t) (#items x N),
///                gamma_u (#users x L), gamma_i (#items x L), delta_u (#users x K)
void write_model(std::ostream& out, const FashionModel& model);
/// Throws BadModelFile on a wrong magic, truncation, or inconsistent content.
FashionModel read_model(std::istream& in);

void save_model(const std::filesystem::path& path, const FashionModel& model);
FashionModel load_model(const std::filesystem::path& path);

}  // namespace fashionista
