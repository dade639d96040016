#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sbtherm/spectrum.hpp"

namespace sbtherm {

// On-disk frame container, little-endian:
//   magic "SBTH" | u32 version | u32 n_bins | f64 f_start | f64 f_step
//   then per frame: f64 t | u32 n_averages | n_bins x f64 psd
// Timestamps must be strictly increasing and the grid is constant per file.

inline constexpr std::uint32_t k_container_version = 1;
inline constexpr char k_container_magic[4] = {'S', 'B', 'T', 'H'};

struct FrameContainer {
  GridSpec grid;
  std::uint32_t version = k_container_version;
  std::vector<SpectrumFrame> frames;

  void validate() const;  // throws DomainError on broken invariants
};

// Atomic write: the file appears under its final name only when complete.
void write_container(const FrameContainer& c, const std::filesystem::path& path);
FrameContainer read_container(const std::filesystem::path& path);  // throws DataError

// Lossless columnar text export for inspection: one header block, then one
// row per (frame, bin).
void export_container_text(const FrameContainer& c, const std::filesystem::path& path);

// Write a file atomically through a temp-and-rename in the same directory.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);

// Streaming writer for long runs; the target file appears only on finish().
class ContainerWriter {
 public:
  ContainerWriter(const std::filesystem::path& path, const GridSpec& grid);
  ~ContainerWriter();
  ContainerWriter(const ContainerWriter&) = delete;
  ContainerWriter& operator=(const ContainerWriter&) = delete;

  void push(const SpectrumFrame& frame);
  void finish();
  std::size_t frames_written() const { return n_frames_; }

 private:
  struct Impl;
  Impl* impl_;
  std::size_t n_frames_ = 0;
};

}  // namespace sbtherm
