import { ApiClient } from "./api.js";
import { ExplorerState, INTERVAL_MAX, INTERVAL_MIN } from "./state.js";
import {
  renderCurve,
  renderErrorBanner,
  renderFeatureTable,
  renderForest,
  renderHistogramPanel,
  renderRumourList,
  renderTopics,
  renderVeracityPanel,
  renderWordCloud,
  type CurvePoint,
} from "./render.js";
import type { IntervalPayload, RumourSummary } from "./types.js";

interface Panels {
  banner: HTMLElement;
  topics: HTMLElement;
  rumours: HTMLElement;
  summary: HTMLElement;
  cloud: HTMLElement;
  slider: HTMLInputElement;
  sliderValue: HTMLElement;
  histogram: HTMLElement;
  veracity: HTMLElement;
  features: HTMLElement;
  forest: HTMLElement;
  veracityCurve: HTMLElement;
  featureCurve: HTMLElement;
  featurePick: HTMLSelectElement;
}

function buildSkeleton(root: HTMLElement): Panels {
  const doc = root.ownerDocument;
  root.textContent = "";

  const banner = doc.createElement("div");
  banner.className = "error-banner";
  banner.hidden = true;
  root.appendChild(banner);

  const columns = doc.createElement("div");
  columns.className = "columns";
  root.appendChild(columns);

  const make = (parent: Element, cls: string, heading?: string): HTMLElement => {
    const node = doc.createElement("div");
    node.className = cls;
    if (heading) {
      const h = doc.createElement("h2");
      h.textContent = heading;
      node.appendChild(h);
    }
    parent.appendChild(node);
    return node;
  };

  const topicsCol = make(columns, "col col-topics", "Topics");
  const topics = make(topicsCol, "topic-list");
  const rumoursCol = make(columns, "col col-rumours", "Rumours");
  const rumours = make(rumoursCol, "rumour-list");

  const detail = make(columns, "col col-detail");
  const summary = make(detail, "summary-panel");
  const cloud = make(detail, "cloud-panel");

  const sliderRow = make(detail, "slider-row");
  const sliderLabel = doc.createElement("label");
  sliderLabel.textContent = "interval";
  sliderRow.appendChild(sliderLabel);
  const slider = doc.createElement("input");
  slider.type = "range";
  slider.min = String(INTERVAL_MIN);
  slider.max = String(INTERVAL_MAX);
  slider.step = "1";
  slider.value = String(INTERVAL_MAX);
  slider.className = "interval-slider";
  sliderRow.appendChild(slider);
  const sliderValue = doc.createElement("span");
  sliderValue.className = "slider-value";
  sliderValue.textContent = String(INTERVAL_MAX);
  sliderRow.appendChild(sliderValue);

  const histogram = make(detail, "histogram-panel", "Stance counts");
  const veracity = make(detail, "veracity-panel", "Veracity");
  const forest = make(detail, "forest-panel", "Propagation");
  const veracityCurve = make(detail, "veracity-curve");

  const pickRow = make(detail, "feature-pick-row");
  const featurePick = doc.createElement("select");
  featurePick.className = "feature-pick";
  pickRow.appendChild(featurePick);
  const featureCurve = make(detail, "feature-curve");
  const features = make(detail, "features-panel", "Features");

  return {
    banner,
    topics,
    rumours,
    summary,
    cloud,
    slider,
    sliderValue,
    histogram,
    veracity,
    features,
    forest,
    veracityCurve,
    featureCurve,
    featurePick,
  };
}

function renderSummaryHeader(container: HTMLElement, summary: RumourSummary): void {
  container.textContent = "";
  const doc = container.ownerDocument;
  const h = doc.createElement("h2");
  h.className = "claim";
  h.textContent = summary.claim;
  container.appendChild(h);
  const meta = doc.createElement("div");
  meta.className = "summary-meta";
  meta.textContent =
    `${summary.topic} | ${summary.tweet_count} tweets from ${summary.user_count} users | ` +
    `${summary.predicted_true ? "likely true" : "likely false"}`;
  container.appendChild(meta);
}

export class Explorer {
  private readonly panels: Panels;
  private readonly intervals = new Map<string, Map<number, IntervalPayload>>();

  constructor(
    root: HTMLElement,
    private readonly api: ApiClient,
    private readonly state = new ExplorerState(),
  ) {
    this.panels = buildSkeleton(root);
    this.panels.slider.addEventListener("input", () => {
      const k = Number(this.panels.slider.value);
      this.panels.sliderValue.textContent = String(k);
      void this.showInterval(k);
    });
    this.panels.featurePick.addEventListener("change", () => this.redrawCurves());
  }

  async start(): Promise<void> {
    try {
      const listing = await this.api.topics();
      renderTopics(this.panels.topics, listing.topics, (t) => void this.showTopic(t));
      renderErrorBanner(this.panels.banner, null);
    } catch (err) {
      this.fail(err);
    }
  }

  async showTopic(topic: string): Promise<void> {
    const token = this.state.selectTopic(topic);
    try {
      const listing = await this.api.topicRumours(topic);
      if (!this.state.isCurrent(token)) {
        return;
      }
      renderRumourList(this.panels.rumours, listing.rumours, (r) => void this.showRumour(r));
      renderErrorBanner(this.panels.banner, null);
    } catch (err) {
      this.fail(err);
    }
  }

  async showRumour(rumourId: string): Promise<void> {
    const token = this.state.selectRumour(rumourId);
    this.panels.slider.value = String(INTERVAL_MAX);
    this.panels.sliderValue.textContent = String(INTERVAL_MAX);
    try {
      const [summary, interval, forest] = await Promise.all([
        this.api.summary(rumourId),
        this.api.interval(rumourId, INTERVAL_MAX),
        this.api.forest(rumourId, INTERVAL_MAX),
      ]);
      if (!this.state.isCurrent(token)) {
        return;
      }
      renderSummaryHeader(this.panels.summary, summary);
      renderWordCloud(this.panels.cloud, summary.word_cloud);
      this.remember(interval);
      this.fillFeaturePick(interval);
      renderHistogramPanel(this.panels.histogram, interval.stance_histogram);
      renderVeracityPanel(this.panels.veracity, interval);
      renderFeatureTable(this.panels.features, interval.features);
      renderForest(this.panels.forest, forest);
      this.redrawCurves();
      renderErrorBanner(this.panels.banner, null);
    } catch (err) {
      this.fail(err);
    }
  }

  async showInterval(k: number): Promise<void> {
    const rumourId = this.state.current.rumour;
    if (rumourId === null) {
      return;
    }
    const token = this.state.setInterval(k);
    try {
      const [interval, forest] = await Promise.all([
        this.api.interval(rumourId, k),
        this.api.forest(rumourId, k),
      ]);
      this.remember(interval);
      if (!this.state.isCurrent(token)) {
        return; // a newer selection already owns the panels
      }
      renderHistogramPanel(this.panels.histogram, interval.stance_histogram);
      renderVeracityPanel(this.panels.veracity, interval);
      renderFeatureTable(this.panels.features, interval.features);
      renderForest(this.panels.forest, forest);
      this.redrawCurves();
      renderErrorBanner(this.panels.banner, null);
    } catch (err) {
      this.fail(err);
    }
  }

  private remember(payload: IntervalPayload): void {
    let perRumour = this.intervals.get(payload.rumour_id);
    if (!perRumour) {
      perRumour = new Map();
      this.intervals.set(payload.rumour_id, perRumour);
    }
    perRumour.set(payload.interval, payload);
  }

  private fillFeaturePick(interval: IntervalPayload): void {
    const pick = this.panels.featurePick;
    const previous = pick.value;
    pick.textContent = "";
    const doc = pick.ownerDocument;
    for (const name of Object.keys(interval.features)) {
      const opt = doc.createElement("option");
      opt.value = name;
      opt.textContent = name;
      pick.appendChild(opt);
    }
    if (previous && interval.features[previous] !== undefined) {
      pick.value = previous;
    }
  }

  private redrawCurves(): void {
    const rumourId = this.state.current.rumour;
    if (rumourId === null) {
      return;
    }
    const cached = this.intervals.get(rumourId);
    if (!cached) {
      return;
    }
    const k = this.state.current.interval;
    const veracity: CurvePoint[] = [];
    const feature: CurvePoint[] = [];
    const pick = this.panels.featurePick.value;
    for (const payload of cached.values()) {
      veracity.push({ k: payload.interval, value: payload.veracity_probability });
      if (pick && payload.features[pick] !== undefined) {
        feature.push({ k: payload.interval, value: payload.features[pick] });
      }
    }
    renderCurve(this.panels.veracityCurve, veracity, k, "veracity over intervals");
    if (pick) {
      renderCurve(this.panels.featureCurve, feature, k, pick);
    }
  }

  private fail(err: unknown): void {
    const message = err instanceof Error ? err.message : String(err);
    renderErrorBanner(this.panels.banner, `service unreachable: ${message}`);
  }
}

export function initExplorer(
  root: HTMLElement,
  api: ApiClient,
  state?: ExplorerState,
): Explorer {
  const explorer = new Explorer(root, api, state);
  void explorer.start();
  return explorer;
}

/* Browser bootstrap: only runs when the host page provides the mount
 * point, so importing this module in tests has no side effects. */
if (typeof document !== "undefined") {
  const mount = document.getElementById("app");
  if (mount) {
    const params = new URLSearchParams(window.location.search);
    const base = params.get("api") ?? "";
    initExplorer(mount, new ApiClient(base));
  }
}
