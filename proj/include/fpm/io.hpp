#pragma once

#include <filesystem>

#include "fpm/field.hpp"
#include "fpm/phantom.hpp"
#include "fpm/solver.hpp"

namespace fpm {

// Binary containers: a little-endian header (magic "FPMC" or "FPMR",
// u16 version, u32 rows, u32 cols) followed by row-major float64 payload
// (re,im pairs for complex fields). Round-trips are bitwise lossless.

void write_field(const std::filesystem::path& path, const Field2D& field);
Field2D read_field(const std::filesystem::path& path);

enum class ImageKind { generic, measurement };

/// measurement kind additionally enforces non-negative entries.
void write_image(const std::filesystem::path& path, const RealImage2D& image,
                 ImageKind kind = ImageKind::generic);
RealImage2D read_image(const std::filesystem::path& path, ImageKind kind = ImageKind::generic);

/// Human-readable key-value manifest with the plan spelled out as nested
/// set/led lines. Doubles are printed with 17 significant digits so the
/// round-trip reproduces every field exactly; unknown keys are rejected and
/// parse errors carry the line number. A manifest with a resolved plan is
/// validated on load.
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);

/// Columns iter,cost,grad_norm at 17 significant digits.
void write_trace_csv(const std::filesystem::path& path, const SolverTrace& trace);

/// Reconstruction error modulo the global phase ambiguity:
/// min over theta of ||s - exp(j*theta) s_ref|| / ||s_ref||, via the
/// closed-form theta = arg <s, s_ref>.
double relative_error_mod_phase(const Field2D& s, const Field2D& s_ref);

}  // namespace fpm
