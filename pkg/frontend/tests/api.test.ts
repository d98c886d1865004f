import { describe, expect, it } from "vitest";
import { ApiClient, ServiceError } from "../src/api.js";
import { fakeService, fixture } from "./helpers.js";

describe("ApiClient", () => {
  it("serves every captured endpoint body unchanged", async () => {
    const service = fakeService();
    const api = new ApiClient("", service.fetch);
    expect(await api.topics()).toEqual(fixture["/topics"]);
    expect(await api.topicRumours("city-incident")).toEqual(
      fixture["/topics/city-incident/rumours"],
    );
    expect(await api.summary("r000")).toEqual(fixture["/rumours/r000/summary"]);
    expect(await api.interval("r000", 7)).toEqual(fixture["/rumours/r000/intervals/7"]);
    expect(await api.forest("r000", 7)).toEqual(fixture["/rumours/r000/forest/7"]);
  });

  it("walking the slider there and back issues each interval request once", async () => {
    const service = fakeService();
    const api = new ApiClient("", service.fetch);
    for (let k = 1; k <= 20; k += 1) {
      await api.interval("r000", k);
      await api.forest("r000", k);
    }
    for (let k = 20; k >= 1; k -= 1) {
      await api.interval("r000", k);
      await api.forest("r000", k);
    }
    const intervalCalls = service.calls.filter((u) => u.includes("/intervals/"));
    const forestCalls = service.calls.filter((u) => u.includes("/forest/"));
    expect(intervalCalls).toHaveLength(20);
    expect(forestCalls).toHaveLength(20);
    expect(new Set(intervalCalls).size).toBe(20);
    expect(new Set(forestCalls).size).toBe(20);
  });

  it("deduplicates concurrent requests for the same path", async () => {
    const service = fakeService({ delays: { "/rumours/r000/intervals/5": 10 } });
    const api = new ApiClient("", service.fetch);
    const [a, b] = await Promise.all([api.interval("r000", 5), api.interval("r000", 5)]);
    expect(a).toEqual(b);
    expect(service.calls).toEqual(["/rumours/r000/intervals/5"]);
  });

  it("raises ServiceError with the body message on http errors", async () => {
    const service = fakeService();
    const api = new ApiClient("", service.fetch);
    const err = await api.summary("missing").then(
      () => null,
      (e: unknown) => e,
    );
    expect(err).toBeInstanceOf(ServiceError);
    expect((err as ServiceError).status).toBe(404);
    expect((err as ServiceError).message).toContain("unknown path");
  });

  it("does not memoise failures, so a retry can succeed", async () => {
    const service = fakeService({ failPaths: ["/rumours/r000/intervals/3"] });
    const api = new ApiClient("", service.fetch);
    await expect(api.interval("r000", 3)).rejects.toBeInstanceOf(ServiceError);
    expect(await api.interval("r000", 3)).toEqual(fixture["/rumours/r000/intervals/3"]);
    expect(service.calls).toHaveLength(2);
  });

  it("prefixes requests with the configured base url", async () => {
    const seen: string[] = [];
    const api = new ApiClient("http://svc:9000", async (url) => {
      seen.push(url);
      return { ok: true, status: 200, json: async () => fixture["/topics"] };
    });
    await api.topics();
    expect(seen).toEqual(["http://svc:9000/topics"]);
  });
});
