#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace umc {

struct Timestamp {
    int month = 1;   // 1-12
    int day = 1;     // 1-31
    int hour = 0;    // 0-23, start of hour (EPW's 1-24 end-of-hour shifted by -1)

    bool operator==(const Timestamp&) const = default;
    std::string str() const;
};

struct WeatherRecord {
    Timestamp time;
    std::optional<double> t_air_2m;        // degC
    std::optional<double> rh_2m;           // %
    std::optional<double> wind_speed_10m;  // m/s
    std::optional<double> wind_dir_10m;    // deg from north, meteorological
    std::optional<double> ghi;             // W/m2
    std::optional<double> dni;             // W/m2
    std::optional<double> dhi;             // W/m2
};

struct SiteLocation {
    std::string name;
    double latitude = 0.0;    // deg
    double longitude = 0.0;   // deg, east positive
    double altitude = 0.0;    // m
    double utc_offset = 0.0;  // h
};

struct SolarPosition {
    double azimuth = 0.0;    // deg from north, clockwise
    double elevation = 0.0;  // deg above horizon
    double zenith = 90.0;    // 90 - elevation
};

struct EpwFile {
    SiteLocation site;
    std::vector<WeatherRecord> records;
};

// Parses an EPW/IWEC-layout hourly climate file.
EpwFile parse_epw(const std::string& path);

// The unique record matching month/day/hour (year ignored). Throws on no match.
const WeatherRecord& select_hour(const std::vector<WeatherRecord>& records,
                                 const Timestamp& t);
// All 24 records of a day, hour order.
std::vector<WeatherRecord> select_day(const std::vector<WeatherRecord>& records,
                                      int month, int day);

// Declination + equation-of-time ephemeris, accuracy well under 0.5 deg.
SolarPosition solar_position(const SiteLocation& site, int month, int day,
                             double local_hour);

int day_of_year(int month, int day);

// Solar-constant extraterrestrial irradiance with day-angle eccentricity.
double extraterrestrial_irradiance(int day_of_year);

// Erbs clearness-index decomposition of global horizontal irradiance.
struct SwSplit { double dni = 0.0, dhi = 0.0; };
SwSplit decompose_ghi(double ghi, double zenith_deg, double extraterrestrial);

// JSON-over-HTTP real-time weather client. Failures are soft: an empty
// partial record is returned and a warning is logged.
struct RealtimeConfig {
    std::string endpoint_url;                       // http://host:port/path
    std::map<std::string, std::string> field_map;   // our field -> provider key
    double timeout_s = 5.0;
};

WeatherRecord fetch_realtime(const RealtimeConfig& config);

} // namespace umc
