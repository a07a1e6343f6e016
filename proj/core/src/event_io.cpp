#include "evcam/event_io.hpp"

#include <fstream>
#include <limits>
#include <ostream>

#include "byte_io.hpp"
#include "evcam/error.hpp"

namespace evcam {

std::vector<std::uint8_t> encode_evtf(const EventFrame& frame) {
  const bool narrow = frame.max_count() <= std::numeric_limits<std::uint8_t>::max();
  detail::ByteWriter w;
  w.bytes("EVTF");
  w.u8(kEvtfVersion);
  w.u8(static_cast<std::uint8_t>(narrow ? EvtfDtype::u8 : EvtfDtype::u16));
  w.u16(2);
  w.u32(static_cast<std::uint32_t>(frame.height()));
  w.u32(static_cast<std::uint32_t>(frame.width()));
  const std::size_t n = frame.width() * frame.height();
  w.buffer().reserve(w.buffer().size() + 2 * n * (narrow ? 1 : 2));
  for (auto plane : {frame.on(), frame.off()}) {
    for (std::uint16_t v : plane) {
      if (narrow) {
        w.u8(static_cast<std::uint8_t>(v));
      } else {
        w.u16(v);
      }
    }
  }
  return w.take();
}

EventFrame decode_evtf(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "EVTF");
  if (r.bytes(4) != "EVTF") throw FormatError("EVTF: bad magic");
  const std::uint8_t version = r.u8();
  if (version != kEvtfVersion) throw FormatError("EVTF: unsupported version " + std::to_string(version));
  const std::uint8_t dtype = r.u8();
  if (dtype > 1) throw FormatError("EVTF: unknown dtype " + std::to_string(dtype));
  const std::uint16_t channels = r.u16();
  if (channels != 2) throw FormatError("EVTF: expected 2 channels, got " + std::to_string(channels));
  const std::size_t h = r.u32();
  const std::size_t w = r.u32();
  const std::size_t sample = dtype == 0 ? 1 : 2;
  if (w == 0 || h == 0) throw FormatError("EVTF: zero dimension");
  if (r.remaining() / sample / 2 / w < h) throw FormatError("EVTF: truncated payload");
  const std::size_t n = w * h;
  std::vector<std::uint16_t> on(n), off(n);
  for (auto* plane : {&on, &off}) {
    for (auto& v : *plane) v = dtype == 0 ? r.u8() : r.u16();
  }
  if (r.remaining() != 0) throw FormatError("EVTF: trailing bytes");
  try {
    return EventFrame(w, h, std::move(on), std::move(off));
  } catch (const InvalidInput& e) {
    throw FormatError(std::string("EVTF: ") + e.what());
  }
}

void write_evtf(const std::string& path, const EventFrame& frame) {
  detail::write_file_bytes(path, encode_evtf(frame));
}

EventFrame read_evtf(const std::string& path) { return decode_evtf(detail::read_file_bytes(path)); }

void write_event_csv(std::ostream& out, const EventFrame& frame) {
  out << "x,y,polarity\n";
  for (std::size_t y = 0; y < frame.height(); ++y) {
    for (std::size_t x = 0; x < frame.width(); ++x) {
      for (std::uint16_t k = 0; k < frame.on_at(x, y); ++k) out << x << ',' << y << ",1\n";
      for (std::uint16_t k = 0; k < frame.off_at(x, y); ++k) out << x << ',' << y << ",-1\n";
    }
  }
}

void write_event_csv(const std::string& path, const EventFrame& frame) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_event_csv(out, frame);
  if (!out) throw IoError("write failed: " + path);
}

Image render_events(const EventFrame& frame) {
  Image img(frame.width(), frame.height(), 3, 1.0f);
  for (std::size_t y = 0; y < frame.height(); ++y) {
    for (std::size_t x = 0; x < frame.width(); ++x) {
      if (frame.on_at(x, y) > 0) {
        img.at(x, y, 1) = 0.0f;
        img.at(x, y, 2) = 0.0f;
      } else if (frame.off_at(x, y) > 0) {
        img.at(x, y, 0) = 0.0f;
        img.at(x, y, 1) = 0.0f;
      }
    }
  }
  return img;
}

}  // namespace evcam
