#include "umc/weather.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <httplib.h>
#include <json.hpp>

namespace umc {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = kPi / 180.0;

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

double parse_num(const std::string& s, size_t row, size_t col) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        return v;
    } catch (...) {
        throw std::runtime_error("EPW row " + std::to_string(row) + " column " +
                                 std::to_string(col) + ": non-numeric field '" + s + "'");
    }
}

std::optional<double> with_sentinel(double v, double sentinel) {
    if (std::abs(v - sentinel) < 1e-9) return std::nullopt;
    return v;
}

} // namespace

std::string Timestamp::str() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02d-%02d %02d:00", month, day, hour);
    return buf;
}

EpwFile parse_epw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open climate file: " + path);
    EpwFile epw;
    std::string line;
    for (int h = 0; h < 8; ++h) {
        if (!std::getline(in, line))
            throw std::runtime_error(path + ": malformed header, fewer than 8 lines");
        if (h == 0) {
            auto f = split_csv(line);
            if (f.size() < 10 || f[0] != "LOCATION")
                throw std::runtime_error(path + ": malformed LOCATION header");
            epw.site.name = f[1];
            size_t n = f.size();
            epw.site.latitude = parse_num(f[n - 4], 1, n - 4);
            epw.site.longitude = parse_num(f[n - 3], 1, n - 3);
            epw.site.utc_offset = parse_num(f[n - 2], 1, n - 2);
            epw.site.altitude = parse_num(f[n - 1], 1, n - 1);
        }
    }
    size_t row = 8;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        auto f = split_csv(line);
        if (f.size() < 22)
            throw std::runtime_error(path + ": row " + std::to_string(row) + " has " +
                                     std::to_string(f.size()) + " fields, expected >= 22");
        WeatherRecord r;
        r.time.month = static_cast<int>(parse_num(f[1], row, 1));
        r.time.day = static_cast<int>(parse_num(f[2], row, 2));
        r.time.hour = static_cast<int>(parse_num(f[3], row, 3)) - 1;  // 1-24 -> 0-23
        r.t_air_2m = with_sentinel(parse_num(f[6], row, 6), 99.9);
        r.rh_2m = with_sentinel(parse_num(f[8], row, 8), 999.0);
        r.ghi = with_sentinel(parse_num(f[13], row, 13), 9999.0);
        r.dni = with_sentinel(parse_num(f[14], row, 14), 9999.0);
        r.dhi = with_sentinel(parse_num(f[15], row, 15), 9999.0);
        r.wind_dir_10m = with_sentinel(parse_num(f[20], row, 20), 999.0);
        r.wind_speed_10m = with_sentinel(parse_num(f[21], row, 21), 999.0);
        if (r.rh_2m && (*r.rh_2m < 0.0 || *r.rh_2m > 100.0)) r.rh_2m.reset();
        if (r.wind_speed_10m && *r.wind_speed_10m < 0.0) r.wind_speed_10m.reset();
        epw.records.push_back(r);
    }
    if (epw.records.empty())
        throw std::runtime_error(path + ": no data rows");
    return epw;
}

const WeatherRecord& select_hour(const std::vector<WeatherRecord>& records,
                                 const Timestamp& t) {
    for (const auto& r : records)
        if (r.time == t) return r;
    throw std::runtime_error("no weather record for " + t.str());
}

std::vector<WeatherRecord> select_day(const std::vector<WeatherRecord>& records,
                                      int month, int day) {
    std::vector<WeatherRecord> out;
    for (const auto& r : records)
        if (r.time.month == month && r.time.day == day) out.push_back(r);
    if (out.empty())
        throw std::runtime_error("no weather records for month " +
                                 std::to_string(month) + " day " + std::to_string(day));
    std::sort(out.begin(), out.end(), [](const WeatherRecord& a, const WeatherRecord& b) {
        return a.time.hour < b.time.hour;
    });
    return out;
}

int day_of_year(int month, int day) {
    static const int cum[12] = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334};
    if (month < 1 || month > 12 || day < 1 || day > 31)
        throw std::runtime_error("invalid month/day");
    return cum[month - 1] + day;
}

SolarPosition solar_position(const SiteLocation& site, int month, int day,
                             double local_hour) {
    int doy = day_of_year(month, day);
    double gamma = 2.0 * kPi / 365.0 * (doy - 1 + (local_hour - 12.0) / 24.0);
    double eqtime = 229.18 * (0.000075 + 0.001868 * std::cos(gamma) -
                              0.032077 * std::sin(gamma) - 0.014615 * std::cos(2 * gamma) -
                              0.040849 * std::sin(2 * gamma));  // minutes
    double decl = 0.006918 - 0.399912 * std::cos(gamma) + 0.070257 * std::sin(gamma) -
                  0.006758 * std::cos(2 * gamma) + 0.000907 * std::sin(2 * gamma) -
                  0.002697 * std::cos(3 * gamma) + 0.00148 * std::sin(3 * gamma);  // rad
    double time_offset = eqtime + 4.0 * site.longitude - 60.0 * site.utc_offset;
    double tst = local_hour * 60.0 + time_offset;  // true solar time, minutes
    double ha = (tst / 4.0 - 180.0) * kDeg;        // hour angle, rad
    double lat = site.latitude * kDeg;
    double cosz = std::sin(lat) * std::sin(decl) +
                  std::cos(lat) * std::cos(decl) * std::cos(ha);
    cosz = std::clamp(cosz, -1.0, 1.0);
    SolarPosition sp;
    sp.zenith = std::acos(cosz) / kDeg;
    sp.elevation = 90.0 - sp.zenith;
    double az = std::atan2(std::sin(ha), std::cos(ha) * std::sin(lat) -
                                             std::tan(decl) * std::cos(lat)) /
                    kDeg +
                180.0;
    if (az < 0.0) az += 360.0;
    if (az >= 360.0) az -= 360.0;
    sp.azimuth = az;
    return sp;
}

double extraterrestrial_irradiance(int doy) {
    return 1367.0 * (1.0 + 0.033 * std::cos(2.0 * kPi * doy / 365.0));
}

SwSplit decompose_ghi(double ghi, double zenith_deg, double e0) {
    SwSplit s;
    if (ghi <= 0.0) return s;
    if (zenith_deg >= 90.0) {
        s.dhi = ghi;  // sun below horizon: everything is diffuse
        return s;
    }
    double cosz = std::cos(zenith_deg * kDeg);
    double kt = ghi / std::max(e0 * cosz, 1e-9);
    double fd;
    if (kt <= 0.22) {
        fd = 1.0 - 0.09 * kt;
    } else if (kt <= 0.80) {
        fd = 0.9511 - 0.1604 * kt + 4.388 * kt * kt - 16.638 * kt * kt * kt +
             12.336 * kt * kt * kt * kt;
    } else {
        fd = 0.165;
    }
    s.dhi = std::clamp(fd, 0.0, 1.0) * ghi;
    s.dni = std::max(0.0, (ghi - s.dhi) / cosz);
    return s;
}

WeatherRecord fetch_realtime(const RealtimeConfig& config) {
    WeatherRecord r;
    auto warn = [](const std::string& msg) {
        std::cerr << "warning: realtime weather: " << msg << " (continuing)\n";
    };
    std::string url = config.endpoint_url;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        warn("bad endpoint URL: " + url);
        return r;
    }
    auto path_start = url.find('/', scheme_end + 3);
    std::string host = url.substr(0, path_start == std::string::npos ? url.size()
                                                                     : path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(host);
    client.set_connection_timeout(static_cast<int>(config.timeout_s),
                                  static_cast<int>(config.timeout_s * 1e6) % 1000000);
    client.set_read_timeout(static_cast<int>(config.timeout_s), 0);
    auto res = client.Get(path);
    if (!res) {
        warn("endpoint unreachable: " + url);
        return r;
    }
    if (res->status < 200 || res->status >= 300) {
        warn("HTTP " + std::to_string(res->status) + " from " + url);
        return r;
    }
    nlohmann::json body = nlohmann::json::parse(res->body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
        warn("response is not a JSON object");
        return r;
    }
    auto grab = [&](const std::string& field) -> std::optional<double> {
        auto it = config.field_map.find(field);
        std::string key = it != config.field_map.end() ? it->second : field;
        if (!body.contains(key) || !body[key].is_number()) return std::nullopt;
        return body[key].get<double>();
    };
    r.t_air_2m = grab("t_air_2m");
    r.rh_2m = grab("rh_2m");
    r.wind_speed_10m = grab("wind_speed_10m");
    r.wind_dir_10m = grab("wind_dir_10m");
    r.ghi = grab("ghi");
    // range validation: out-of-range fields are rejected, others kept
    if (r.rh_2m && (*r.rh_2m < 0.0 || *r.rh_2m > 100.0)) {
        warn("rh out of [0,100], rejected");
        r.rh_2m.reset();
    }
    if (r.wind_speed_10m && *r.wind_speed_10m < 0.0) {
        warn("negative wind speed, rejected");
        r.wind_speed_10m.reset();
    }
    if (r.wind_dir_10m && (*r.wind_dir_10m < 0.0 || *r.wind_dir_10m >= 360.0)) {
        warn("wind direction out of [0,360), rejected");
        r.wind_dir_10m.reset();
    }
    if (r.ghi && *r.ghi < 0.0) {
        warn("negative irradiance, rejected");
        r.ghi.reset();
    }
    return r;
}

} // namespace umc
