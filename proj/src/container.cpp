#include "sbtherm/container.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "sbtherm/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

namespace sbtherm {

namespace fs = std::filesystem;

void FrameContainer::validate() const {
  grid.validate();
  double prev_t = -1e300;
  for (const SpectrumFrame& f : frames) {
    if (f.psd.size() != grid.n_bins) throw DomainError("container: frame bin count mismatch");
    if (!(f.t > prev_t)) throw DomainError("container: timestamps must be strictly increasing");
    prev_t = f.t;
  }
}

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}
void put_f64(std::ofstream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), 8);
}

struct Reader {
  std::ifstream in;
  std::uint64_t offset = 0;

  explicit Reader(const fs::path& path) : in(path, std::ios::binary) {
    if (!in) throw DataError("cannot open container file: " + path.string(), 0);
  }

  void read_raw(void* dst, std::size_t n, const char* what) {
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) {
      throw DataError(std::string("truncated container while reading ") + what, offset);
    }
    offset += n;
  }

  std::uint32_t get_u32(const char* what) {
    std::uint32_t v;
    read_raw(&v, 4, what);
    return v;
  }
  double get_f64(const char* what) {
    double v;
    read_raw(&v, 8, what);
    return v;
  }
  bool at_eof() {
    return in.peek() == std::char_traits<char>::eof();
  }
};

}  // namespace

void write_container(const FrameContainer& c, const fs::path& path) {
  c.validate();
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + tmp.string(), 0);
    out.write(k_container_magic, 4);
    put_u32(out, c.version);
    put_u32(out, static_cast<std::uint32_t>(c.grid.n_bins));
    put_f64(out, c.grid.f_start_hz);
    put_f64(out, c.grid.f_step_hz);
    for (const SpectrumFrame& f : c.frames) {
      put_f64(out, f.t);
      put_u32(out, static_cast<std::uint32_t>(std::llround(f.n_averages)));
      out.write(reinterpret_cast<const char*>(f.psd.data()),
                static_cast<std::streamsize>(8 * f.psd.size()));
    }
    if (!out) throw DataError("write failed: " + tmp.string(), 0);
  }
  fs::rename(tmp, path);
}

FrameContainer read_container(const fs::path& path) {
  Reader r(path);
  char magic[4];
  r.read_raw(magic, 4, "magic");
  if (std::memcmp(magic, k_container_magic, 4) != 0) {
    throw DataError("bad container magic", 0);
  }
  FrameContainer c;
  c.version = r.get_u32("version");
  if (c.version != k_container_version) {
    throw DataError("unsupported container version " + std::to_string(c.version), 4);
  }
  const std::uint32_t n_bins = r.get_u32("n_bins");
  c.grid.n_bins = n_bins;
  c.grid.f_start_hz = r.get_f64("f_start");
  c.grid.f_step_hz = r.get_f64("f_step");
  if (n_bins < 64 || !(c.grid.f_step_hz > 0.0) || !std::isfinite(c.grid.f_step_hz) ||
      !std::isfinite(c.grid.f_start_hz)) {
    throw DataError("invalid container grid header", 8);
  }

  double prev_t = -1e300;
  while (!r.at_eof()) {
    const std::uint64_t frame_offset = r.offset;
    SpectrumFrame f;
    f.t = r.get_f64("frame time");
    if (!std::isfinite(f.t) || !(f.t > prev_t)) {
      throw DataError("non-increasing or invalid frame timestamp", frame_offset);
    }
    prev_t = f.t;
    const std::uint32_t n_av = r.get_u32("n_averages");
    if (n_av < 1) throw DataError("frame n_averages must be >= 1", frame_offset + 8);
    f.n_averages = n_av;
    f.grid = c.grid;
    f.psd.resize(n_bins);
    r.read_raw(f.psd.data(), 8 * n_bins, "frame psd");
    for (std::size_t b = 0; b < n_bins; ++b) {
      if (!std::isfinite(f.psd[b]) || f.psd[b] < 0.0) {
        throw DataError("invalid psd value", frame_offset + 12 + 8 * b);
      }
    }
    c.frames.push_back(std::move(f));
  }
  return c;
}

void export_container_text(const FrameContainer& c, const fs::path& path) {
  std::string body;
  body.reserve(64 * c.frames.size() * c.grid.n_bins / 4);
  char line[160];
  std::snprintf(line, sizeof(line),
                "# version %u n_bins %zu f_start_hz %.17g f_step_hz %.17g\n", c.version,
                c.grid.n_bins, c.grid.f_start_hz, c.grid.f_step_hz);
  body += line;
  body += "# t_s\tn_averages\tbin\tfreq_hz\tpsd\n";
  for (const SpectrumFrame& f : c.frames) {
    for (std::size_t b = 0; b < f.psd.size(); ++b) {
      std::snprintf(line, sizeof(line), "%.17g\t%.17g\t%zu\t%.17g\t%.17g\n", f.t, f.n_averages,
                    b, f.grid.freq(b), f.psd[b]);
      body += line;
    }
  }
  atomic_write_text(path, body);
}

struct ContainerWriter::Impl {
  fs::path final_path;
  fs::path tmp_path;
  std::ofstream out;
  GridSpec grid;
  double prev_t = -1e300;
  bool finished = false;
};

ContainerWriter::ContainerWriter(const fs::path& path, const GridSpec& grid) {
  grid.validate();
  impl_ = new Impl;
  impl_->final_path = path;
  impl_->tmp_path = path.string() + ".tmp";
  impl_->grid = grid;
  impl_->out.open(impl_->tmp_path, std::ios::binary | std::ios::trunc);
  if (!impl_->out) throw DataError("cannot open for writing: " + impl_->tmp_path.string(), 0);
  impl_->out.write(k_container_magic, 4);
  put_u32(impl_->out, k_container_version);
  put_u32(impl_->out, static_cast<std::uint32_t>(grid.n_bins));
  put_f64(impl_->out, grid.f_start_hz);
  put_f64(impl_->out, grid.f_step_hz);
}

ContainerWriter::~ContainerWriter() {
  if (impl_ && !impl_->finished) {
    impl_->out.close();
    std::error_code ec;
    fs::remove(impl_->tmp_path, ec);  // abandoned write leaves no partial file
  }
  delete impl_;
}

void ContainerWriter::push(const SpectrumFrame& frame) {
  if (frame.psd.size() != impl_->grid.n_bins) {
    throw DomainError("container writer: frame bin count mismatch");
  }
  if (!(frame.t > impl_->prev_t)) {
    throw DomainError("container writer: timestamps must be strictly increasing");
  }
  impl_->prev_t = frame.t;
  put_f64(impl_->out, frame.t);
  put_u32(impl_->out, static_cast<std::uint32_t>(std::llround(frame.n_averages)));
  impl_->out.write(reinterpret_cast<const char*>(frame.psd.data()),
                   static_cast<std::streamsize>(8 * frame.psd.size()));
  if (!impl_->out) throw DataError("write failed: " + impl_->tmp_path.string(), 0);
  ++n_frames_;
}

void ContainerWriter::finish() {
  impl_->out.close();
  fs::rename(impl_->tmp_path, impl_->final_path);
  impl_->finished = true;
}

void atomic_write_text(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + tmp.string(), 0);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("write failed: " + tmp.string(), 0);
  }
  fs::rename(tmp, path);
}

}  // namespace sbtherm
