// API wire types, mirroring the service's JSON bodies.

export type Level = "very_low" | "low" | "medium" | "high" | "very_high";

export const LEVELS: Level[] = ["very_low", "low", "medium", "high", "very_high"];

export type ScopeName = "relationship" | "site" | "task" | "project";

export interface FactorInfo {
  id: string;
  name: string;
  kind: "ordinal" | "enum";
  values?: string[];
  derived?: boolean;
}

export interface FactorGroup {
  scope: ScopeName;
  factors: FactorInfo[];
}

export interface FactorsResponse {
  kb_version: number;
  groups: FactorGroup[];
}

export interface RuleInfo {
  id: number;
  text: string;
  expression: string;
  effects: string[];
  description: string;
  provenance: string;
  confidence: { confirmations: number; refutations: number };
  retired: boolean;
}

export interface RulesResponse {
  kb_version: number;
  rules: RuleInfo[];
}

export interface RankedEntry {
  rule: number;
  relevance: string;
  expression: string;
  effects: string[];
  description: string;
  missing?: string[];
}

export interface ContextReport {
  task: string;
  site: string;
  counterpart: string;
  ranked: RankedEntry[];
  indeterminate: RankedEntry[];
}

export interface RiskRollupEntry {
  rule: number;
  relevance: string;
}

export interface RiskRollup {
  risk: string;
  name: string;
  impact: string;
  increasing: RiskRollupEntry[];
  mitigating: RiskRollupEntry[];
}

export interface Report {
  project: string;
  kb_version: number;
  threshold: string;
  mode: string;
  contexts: ContextReport[];
  risks: RiskRollup[];
}

export interface AssessResponse {
  meta: { generated_at: string };
  report: Report;
}

export interface ComparisonRuleRow {
  rule: number;
  expression: string;
  relevance: (string | null)[];
  reported: boolean[];
}

export interface ComparisonRiskRow {
  risk: string;
  increasing: (string | null)[];
  mitigating: (string | null)[];
}

export interface Comparison {
  kb_version: number;
  threshold: string;
  mode: string;
  variants: string[];
  rules: ComparisonRuleRow[];
  risks: ComparisonRiskRow[];
  delta: number[];
}

export interface CompareResponse {
  meta: { generated_at: string };
  comparison: Comparison;
}

export interface SiteDecl {
  id: string;
  name: string;
}

export interface TaskDecl {
  id: string;
  name: string;
}

export interface ProjectDoc {
  id: string;
  coordinating_site: string;
  sites: SiteDecl[];
  tasks: TaskDecl[];
  assignments: Record<string, string>;
  bindings: {
    project: Record<string, string>;
    site: Record<string, Record<string, string>>;
    task: Record<string, Record<string, string>>;
    pair: Record<string, Record<string, string>>;
  };
  site_count_scale?: Record<string, string>;
}

export interface KbEvent {
  kb_version: number;
  kind: string;
  target?: string;
  note?: string;
  payload?: Record<string, string>;
}

export interface ApiErrorBody {
  errors: { message: string }[];
  kb_version?: number;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: ApiErrorBody,
  ) {
    super(body.errors.map((e) => e.message).join("; ") || `HTTP ${status}`);
  }

  get isConflict(): boolean {
    return this.status === 409;
  }
}
