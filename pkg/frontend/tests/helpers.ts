import fixtureJson from "./fixture.json";
import type { FetchLike } from "../src/api.js";

export const fixture = fixtureJson as unknown as Record<string, unknown>;

export interface FakeService {
  fetch: FetchLike;
  calls: string[];
}

const wait = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

/** Fetch stub serving the captured endpoint bodies. `delays` holds per-path
 *  response delays in ms, for staleness scenarios. `failPaths` answer 500
 *  once each, then recover. */
export function fakeService(options?: {
  delays?: Record<string, number>;
  failPaths?: string[];
}): FakeService {
  const calls: string[] = [];
  const pendingFailures = new Set(options?.failPaths ?? []);
  const fetch: FetchLike = async (url: string) => {
    calls.push(url);
    const delay = options?.delays?.[url];
    if (delay) {
      await wait(delay);
    }
    if (pendingFailures.has(url)) {
      pendingFailures.delete(url);
      return {
        ok: false,
        status: 500,
        json: async () => ({ error: "injected failure" }),
      };
    }
    const body = fixture[url];
    if (body === undefined) {
      return {
        ok: false,
        status: 404,
        json: async () => ({ error: `unknown path ${url}` }),
      };
    }
    return { ok: true, status: 200, json: async () => body };
  };
  return { fetch, calls };
}

export function brokenService(): FakeService {
  const calls: string[] = [];
  const fetch: FetchLike = async (url: string) => {
    calls.push(url);
    throw new TypeError("fetch failed");
  };
  return { fetch, calls };
}

export const flush = () => new Promise<void>((resolve) => setTimeout(resolve, 0));

export async function settle(rounds = 6): Promise<void> {
  for (let i = 0; i < rounds; i += 1) {
    await flush();
  }
}
