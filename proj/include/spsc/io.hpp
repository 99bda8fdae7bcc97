#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spsc/correlator.hpp"
#include "spsc/coupling.hpp"
#include "spsc/fit_recipes.hpp"
#include "spsc/fitter.hpp"
#include "spsc/tag_stream.hpp"

// Readers throw FormatError on malformed content and std::runtime_error
// when a file cannot be opened.

namespace spsc::io {

// Tag CSV: optional "# duration_ps=N" line, header "channel,time_ps", then
// one tag per line.
void write_tags_csv(std::ostream& os, const TagStream& s);
TagStream read_tags_csv(std::istream& is, std::optional<TimePs> duration_ps = std::nullopt);

// Tag binary: "PTAG", u16 LE version 1, then 12-byte records
// {i64 LE time_ps, u16 LE channel, u16 zero padding}. The format carries no
// duration; without an explicit one it is taken as last time + 1.
inline constexpr std::uint16_t kTagBinaryVersion = 1;
void write_tags_binary(std::ostream& os, const TagStream& s);
TagStream read_tags_binary(std::istream& is, std::optional<TimePs> duration_ps = std::nullopt);

enum class TagFormat { kCsv, kBinary };
/// ".csv" selects CSV, anything else binary.
TagFormat tag_format_for(const std::filesystem::path& path);
void write_tags(const std::filesystem::path& path, const TagStream& s);
TagStream read_tags(const std::filesystem::path& path, std::optional<TimePs> duration_ps = std::nullopt);

// Histogram CSV: "# norm=..." and "# total_pairs=..." metadata lines, header
// "bin_start_ps,bin_end_ps,counts,normalized", one bin per line.
void write_histogram_csv(std::ostream& os, const Histogram& h);
Histogram read_histogram_csv(std::istream& is);
void write_histogram(const std::filesystem::path& path, const Histogram& h);
Histogram read_histogram(const std::filesystem::path& path);

// Fit result: "key = value" lines; parameters as "param <name> = <value> +/- <sigma>".
void write_fit_result(std::ostream& os, const FitResult& r);
FitResult read_fit_result(std::istream& is);
void write_fit_result(const std::filesystem::path& path, const FitResult& r);
FitResult read_fit_result(const std::filesystem::path& path);

// Field map: "nx ny dx_um dy_um", then nx*ny lines "re im", row-major.
void write_field_map(std::ostream& os, const FieldMap& f);
FieldMap read_field_map(std::istream& is);
void write_field_map(const std::filesystem::path& path, const FieldMap& f);
FieldMap read_field_map(const std::filesystem::path& path);

/// Comma-separated "x,y[,sigma]" rows; '#' comments and a non-numeric
/// header row are skipped.
std::vector<DataPoint> read_points_csv(std::istream& is);
std::vector<DataPoint> read_points(const std::filesystem::path& path);

/// Shortest round-trip text for a double.
std::string format_double(double v);

}  // namespace spsc::io
