#pragma once

namespace ufcsim {

// Simulation runs on a periodic week starting Monday 00:00.
// Load synthesis uses 4-minute slots, billing uses 15-minute slots.

inline constexpr int kSimSlotMinutes = 4;
inline constexpr int kBillSlotMinutes = 15;

inline constexpr int kMinutesPerDay = 24 * 60;
inline constexpr int kMinutesPerWeek = 7 * kMinutesPerDay;

inline constexpr int kSimSlotsPerHour = 60 / kSimSlotMinutes;   // 15
inline constexpr int kSimSlotsPerDay = kMinutesPerDay / kSimSlotMinutes;   // 360
inline constexpr int kSimSlotsPerWeek = kMinutesPerWeek / kSimSlotMinutes; // 2520

inline constexpr int kBillSlotsPerDay = kMinutesPerDay / kBillSlotMinutes;   // 96
inline constexpr int kBillSlotsPerWeek = kMinutesPerWeek / kBillSlotMinutes; // 672

inline constexpr double kSimSlotHours = kSimSlotMinutes / 60.0;   // 1/15 h
inline constexpr double kBillSlotHours = kBillSlotMinutes / 60.0; // 0.25 h

} // namespace ufcsim
