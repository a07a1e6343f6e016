#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "evcam/eventgen.hpp"
#include "evcam/image.hpp"

namespace evcam {

inline constexpr std::uint8_t kEvtfVersion = 1;

enum class EvtfDtype : std::uint8_t { u8 = 0, u16 = 1 };

// EVTF, little-endian:
//   "EVTF" | version u8 = 1 | dtype u8 (0 = u8, 1 = u16) | channels u16 = 2 |
//   height u32 | width u32 | ON plane | OFF plane   (each row-major)
// The writer picks u8 when every count fits, u16 otherwise.
std::vector<std::uint8_t> encode_evtf(const EventFrame& frame);
EventFrame decode_evtf(std::span<const std::uint8_t> bytes);

void write_evtf(const std::string& path, const EventFrame& frame);
EventFrame read_evtf(const std::string& path);

/// Header `x,y,polarity`, then one row per event in row-major pixel order,
/// polarity 1 (ON) or -1 (OFF), counts expanded into repeated rows.
void write_event_csv(std::ostream& out, const EventFrame& frame);
void write_event_csv(const std::string& path, const EventFrame& frame);

/// White background, ON pixels red, OFF pixels blue.
Image render_events(const EventFrame& frame);

}  // namespace evcam
