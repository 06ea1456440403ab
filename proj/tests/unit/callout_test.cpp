// Copyright 2026 The credstack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "credstack/callout.hpp"

#include <gtest/gtest.h>

#include <chrono>

#include "credstack/error.hpp"
#include "fixtures.hpp"

namespace {

using namespace credstack;
using nlohmann::json;
using namespace std::chrono_literals;

// Replies with the whole request, escaped into "value".
constexpr const char* kEchoScript =
    "req=$(cat | sed 's/\\\\/\\\\\\\\/g; s/\"/\\\\\"/g')\n"
    "printf '{\"type\": \"scitoken\", \"value\": \"%s\", \"expiry\": 42}' \"$req\"";

class CalloutTest : public ::testing::Test {
 protected:
  CalloutInvocation invocation(const std::string& script_body,
                               const std::string& type = "scitoken") {
    fixtures::write_script(dir_ / "callout.sh", script_body);
    CalloutInvocation call;
    call.executable = "callout.sh";
    call.plugin_dir = dir_.path();
    call.executable = resolve_callout(call.executable, call.plugin_dir);
    call.context = {{"type", type}};
    call.timeout = 5s;
    return call;
  }

  fixtures::TempDir dir_;
};

TEST_F(CalloutTest, RequestCarriesContextKwargsAndArgs) {
  CalloutInvocation call = invocation(kEchoScript);
  call.context["callout"] = "callout.sh";
  call.kwargs = {{"param1", "value1"}, {"param2", "value2"}};
  call.args.site_name = "SITE_A";
  call.args.purpose = Purpose::Payload;
  call.args.set_extra("param2", "override");

  const GeneratedValue value = run_callout(call);
  EXPECT_EQ(value.type_tag, "scitoken");
  EXPECT_EQ(value.expiry, 42);

  const json request = json::parse(value.value);
  EXPECT_EQ(request["context"]["callout"], "callout.sh");
  EXPECT_EQ(request["kwargs"], (json{{"param1", "value1"}, {"param2", "override"}}));
  EXPECT_EQ(request["args"]["site_name"], "SITE_A");
  EXPECT_EQ(request["args"]["purpose"], "payload");
  EXPECT_TRUE(request["args"]["trust_domain"].is_null());
}

TEST_F(CalloutTest, RequestDocumentShape) {
  CalloutInvocation call;
  call.context = {{"type", "text"}};
  call.kwargs = {{"a", 1}};
  call.args.set_extra("b", 2);
  const json request = callout_request(call);
  EXPECT_EQ(request["kwargs"], (json{{"a", 1}, {"b", 2}}));
  EXPECT_EQ(request["context"], call.context);
  EXPECT_TRUE(request["args"].contains("site_name"));
}

TEST_F(CalloutTest, NonzeroExitCarriesCodeAndStderr) {
  const CalloutInvocation call = invocation("cat >/dev/null\necho 'token service down' >&2\nexit 3");
  try {
    run_callout(call);
    FAIL() << "expected CalloutFailed";
  } catch (const CalloutFailed& e) {
    EXPECT_EQ(e.exit_code(), 3);
    EXPECT_EQ(e.stderr_text(), "token service down\n");
  }
}

TEST_F(CalloutTest, SlowCalloutTimesOut) {
  CalloutInvocation call = invocation("exec sleep 10");
  call.timeout = 200ms;
  const auto start = std::chrono::steady_clock::now();
  EXPECT_THROW(run_callout(call), CalloutTimeout);
  EXPECT_LT(std::chrono::steady_clock::now() - start, 5s);
}

TEST_F(CalloutTest, ProtocolViolations) {
  EXPECT_THROW(run_callout(invocation("cat >/dev/null; echo not json")), CalloutProtocolError);
  EXPECT_THROW(run_callout(invocation("cat >/dev/null; echo '[1]'")), CalloutProtocolError);
  EXPECT_THROW(run_callout(invocation("cat >/dev/null; echo '{\"type\": \"scitoken\"}'")),
               CalloutProtocolError);
  EXPECT_THROW(
      run_callout(invocation("cat >/dev/null; echo '{\"type\": \"scitoken\", \"value\": 5}'")),
      CalloutProtocolError);
  EXPECT_THROW(run_callout(invocation(
                   "cat >/dev/null; echo '{\"type\": \"scitoken\", \"value\": \"v\", "
                   "\"expiry\": \"soon\"}'")),
               CalloutProtocolError);
}

TEST_F(CalloutTest, ReplyTypeMustMatchContext) {
  const CalloutInvocation call =
      invocation("cat >/dev/null; echo '{\"type\": \"text\", \"value\": \"v\"}'");
  EXPECT_THROW(run_callout(call), CalloutProtocolError);
}

TEST_F(CalloutTest, CalloutIgnoringStdinStillWorks) {
  const CalloutInvocation call =
      invocation("echo '{\"type\": \"scitoken\", \"value\": \"v\"}'");
  const GeneratedValue value = run_callout(call);
  EXPECT_EQ(value.value, "v");
  EXPECT_FALSE(value.expiry.has_value());
}

TEST_F(CalloutTest, ResolveCallout) {
  fixtures::write_script(dir_ / "ok.sh", "exit 0");
  fixtures::write_file(dir_ / "plain.txt", "not executable");
  EXPECT_EQ(resolve_callout("ok.sh", dir_.path()), dir_ / "ok.sh");
  EXPECT_EQ(resolve_callout(dir_ / "ok.sh", "/nonexistent"), dir_ / "ok.sh");
  EXPECT_THROW(resolve_callout("missing.sh", dir_.path()), CalloutNotFound);
  EXPECT_THROW(resolve_callout("plain.txt", dir_.path()), CalloutNotFound);
  EXPECT_THROW(resolve_callout(".", dir_.path()), CalloutNotFound);
}

TEST_F(CalloutTest, ContextWithoutTypeRejected) {
  CalloutInvocation call = invocation("echo '{}'");
  call.context = json::object();
  EXPECT_THROW(run_callout(call), InvalidContext);
}

}  // namespace
