import type {
  ForestPayload,
  IntervalPayload,
  RumourSummary,
  TopicList,
  TopicRumours,
} from "./types.js";

export class ServiceError extends Error {
  constructor(message: string, readonly status: number | null) {
    super(message);
    this.name = "ServiceError";
  }
}

/** The slice of fetch() the client needs; tests substitute a canned one. */
export type FetchLike = (
  url: string,
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

/**
 * Read-only service client with a permanent per-path memo.
 *
 * Artifacts behind the service are immutable, so a response can never go
 * stale: each distinct path is fetched at most once, and stepping the
 * interval slider across 1..20 costs exactly twenty interval requests no
 * matter how the user scrubs. Failed requests are evicted so a recovered
 * service can be retried.
 */
export class ApiClient {
  private readonly cache = new Map<string, Promise<unknown>>();

  constructor(
    private readonly base: string,
    private readonly fetchImpl: FetchLike = (url) => fetch(url),
  ) {}

  private get(path: string): Promise<unknown> {
    const hit = this.cache.get(path);
    if (hit) {
      return hit;
    }
    const request = this.fetchImpl(this.base + path).then(async (res) => {
      const body = (await res.json().catch(() => null)) as
        | { error?: unknown }
        | null;
      if (!res.ok) {
        const message =
          body && typeof body.error === "string"
            ? body.error
            : `request failed with status ${res.status}`;
        throw new ServiceError(message, res.status);
      }
      return body;
    });
    this.cache.set(path, request);
    request.catch(() => {
      if (this.cache.get(path) === request) {
        this.cache.delete(path);
      }
    });
    return request;
  }

  topics(): Promise<TopicList> {
    return this.get("/topics") as Promise<TopicList>;
  }

  topicRumours(topic: string): Promise<TopicRumours> {
    return this.get(
      `/topics/${encodeURIComponent(topic)}/rumours`,
    ) as Promise<TopicRumours>;
  }

  summary(rumourId: string): Promise<RumourSummary> {
    return this.get(
      `/rumours/${encodeURIComponent(rumourId)}/summary`,
    ) as Promise<RumourSummary>;
  }

  interval(rumourId: string, k: number): Promise<IntervalPayload> {
    return this.get(
      `/rumours/${encodeURIComponent(rumourId)}/intervals/${k}`,
    ) as Promise<IntervalPayload>;
  }

  forest(rumourId: string, k: number): Promise<ForestPayload> {
    return this.get(
      `/rumours/${encodeURIComponent(rumourId)}/forest/${k}`,
    ) as Promise<ForestPayload>;
  }
}
