/** Typed models for the rumour service endpoints.
 *
 * Every 200 body carries `v: 1`; errors use the same envelope with an
 * `error` string. The UI never derives numbers itself, so these shapes
 * are the complete vocabulary of what it can display.
 */

export const SCHEMA_VERSION = 1;

export interface TopicEntry {
  topic: string;
  rumour_count: number;
}

export interface TopicList {
  v: number;
  topics: TopicEntry[];
}

export interface StanceHistogram {
  support: number;
  neutral: number;
  against: number;
}

export interface RumourRow {
  rumour_id: string;
  claim: string;
  started_at: number;
  first_tweet_at: number | null;
  tweet_count: number;
  stance_histogram: StanceHistogram;
  veracity_probability: number;
  predicted_true: boolean;
}

export interface TopicRumours {
  v: number;
  topic: string;
  rumours: RumourRow[];
}

export interface WordCloudEntry {
  token: string;
  count: number;
}

export interface RumourSummary {
  v: number;
  rumour_id: string;
  topic: string;
  claim: string;
  started_at: number;
  verified_at: number;
  first_tweet_at: number | null;
  tweet_count: number;
  user_count: number;
  stance_histogram: StanceHistogram;
  features: Record<string, number>;
  veracity_probability: number;
  predicted_true: boolean;
  word_cloud: WordCloudEntry[];
}

export interface IntervalPayload {
  v: number;
  rumour_id: string;
  interval: number;
  cutoff: number;
  tweet_count: number;
  stance_histogram: StanceHistogram;
  features: Record<string, number>;
  veracity_probability: number;
}

export type StanceName = "support" | "neutral" | "against";

export interface ForestNode {
  user: string;
  joined_at: number;
}

export interface ForestEdge {
  parent: string;
  child: string;
  ts: number;
  via_follow: boolean;
}

export interface StanceForest {
  stance: StanceName;
  colour: string; // service-declared colour name: green | grey | red
  nodes: ForestNode[];
  edges: ForestEdge[];
  roots: string[];
}

export interface ForestPayload {
  v: number;
  rumour_id: string;
  interval: number;
  cutoff: number;
  stances: StanceForest[];
}
