#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "campus/service.hpp"

namespace campus::api {

struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
  std::string bearer;  // token from "Authorization: Bearer ...", empty if absent
};

struct Response {
  int status = 200;
  std::string body;  // canonical JSON
};

/// Empty role set on an authenticated route means any role.
struct RouteInfo {
  std::string method;
  std::string pattern;
  bool authenticated = true;
  std::set<service::Role> roles;
};

int http_status(Errc code);
Response error_response(const Error& e);

class Router {
 public:
  explicit Router(service::CampusService& service) : service_(service) {}

  Response handle(const Request& request);

  static const std::vector<RouteInfo>& routes();

 private:
  service::CampusService& service_;
};

}  // namespace campus::api
