#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>

namespace noble {

/// Writes `content` to `path` atomically: a sibling temp file is written
/// first, then renamed over the destination.
void atomic_write_file(const std::string& path, const std::string& content);

/// Reads a whole file; throws MissingFile if it cannot be opened.
std::string read_file(const std::string& path);

/// Shortest decimal form that round-trips a double exactly.
std::string format_double(double v);

// Little-endian binary primitives. Writers/readers throw IoError on
// short streams.
void write_u16(std::ostream& out, std::uint16_t v);
void write_u32(std::ostream& out, std::uint32_t v);
void write_f32(std::ostream& out, float v);
void write_f64(std::ostream& out, double v);
std::uint16_t read_u16(std::istream& in);
std::uint32_t read_u32(std::istream& in);
float read_f32(std::istream& in);
double read_f64(std::istream& in);

/// Worker count for internal data parallelism: min(hardware, NOBLE_THREADS).
int worker_count();

/// Runs fn(i) for i in [0, n) across workers. Each index is processed
/// exactly once; callers must make writes disjoint per index so results
/// are deterministic regardless of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace noble
