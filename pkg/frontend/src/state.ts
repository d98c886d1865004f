export const INTERVAL_MIN = 1;
export const INTERVAL_MAX = 20;

export interface ViewState {
  topic: string | null;
  rumour: string | null;
  interval: number;
}

/**
 * Selection state plus a monotonically increasing token.
 *
 * Every mutation returns a fresh token; an async render started by that
 * mutation asks `isCurrent(token)` before touching the DOM. A slow
 * interval-3 response that lands after the user moved to interval 4 fails
 * the check and is dropped, so the last write always wins and no panel
 * ever shows a stale interval.
 */
export class ExplorerState {
  private state: ViewState = { topic: null, rumour: null, interval: INTERVAL_MAX };
  private seq = 0;

  get current(): ViewState {
    return { ...this.state };
  }

  selectTopic(topic: string): number {
    this.state = { topic, rumour: null, interval: INTERVAL_MAX };
    return ++this.seq;
  }

  selectRumour(rumour: string): number {
    if (this.state.topic === null) {
      throw new Error("select a topic before a rumour");
    }
    this.state = { ...this.state, rumour, interval: INTERVAL_MAX };
    return ++this.seq;
  }

  setInterval(k: number): number {
    if (!Number.isInteger(k) || k < INTERVAL_MIN || k > INTERVAL_MAX) {
      throw new RangeError(`interval out of range ${INTERVAL_MIN}..${INTERVAL_MAX}`);
    }
    if (this.state.rumour === null) {
      throw new Error("select a rumour before moving the slider");
    }
    this.state = { ...this.state, interval: k };
    return ++this.seq;
  }

  isCurrent(token: number): boolean {
    return token === this.seq;
  }
}
