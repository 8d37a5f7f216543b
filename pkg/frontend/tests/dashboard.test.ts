// Dashboard contract: the UI never recomputes relevance; every displayed
// ordering and level comes verbatim from the service response.

import { describe, expect, it } from "vitest";

import type { AssessResponse, FactorsResponse, ProjectDoc } from "../src/types.js";
import {
  dashboardCards,
  indeterminatePanel,
  missingFactorAnchor,
  reportedRuleIds,
  riskRollup,
} from "../src/viewmodel.js";
import { fixture } from "./helpers.js";

const factors = fixture<FactorsResponse>("factors.json");

describe("ranked cards", () => {
  it("ordering equals the service ranking exactly", () => {
    const { report } = fixture<AssessResponse>("report_demo_high.json");
    const cards = dashboardCards(report);
    const expected = report.contexts.flatMap(
      (context) => context.ranked.map((entry) => entry.rule));
    expect(cards.map((card) => card.ruleId)).toEqual(expected);
    const expectedLevels = report.contexts.flatMap(
      (context) => context.ranked.map((entry) => entry.relevance));
    expect(cards.map((card) => card.relevance)).toEqual(expectedLevels);
  });

  it("two-site report shows rules 1 and 3 only", () => {
    const { report } = fixture<AssessResponse>("report_two_site_b.json");
    const cards = dashboardCards(report);
    expect(cards.map((card) => card.ruleId)).toEqual([1, 3]);
    expect(cards.every((card) =>
      ["high", "very_high"].includes(card.relevance))).toBe(true);
  });

  it("splits effect polarity for display", () => {
    const { report } = fixture<AssessResponse>("report_two_site_b.json");
    const cards = dashboardCards(report);
    expect(cards[0].effects).toEqual(
      [{ sign: "+", risk: "communication_problems" }]);
    expect(cards[1].effects).toEqual(
      [{ sign: "-", risk: "communication_problems" }]);
  });
});

describe("indeterminate panel", () => {
  it("a fresh project puts every user-assessable rule in the panel", () => {
    const { report } = fixture<AssessResponse>("report_fresh.json");
    expect(dashboardCards(report)).toHaveLength(0);
    const items = indeterminatePanel(report);
    // 35 of 36: the site-count rule is determinate because its only
    // factor is derived from the assignments
    expect(items).toHaveLength(35);
    expect(items.map((item) => item.ruleId)).not.toContain(36);
    for (const item of items) {
      expect(item.missing.length).toBeGreaterThan(0);
    }
  });

  it("missing-factor links resolve to the owning form input", () => {
    const { report } = fixture<AssessResponse>("report_fresh.json");
    const project = {
      id: "fresh",
      coordinating_site: "hq",
      sites: [{ id: "hq", name: "HQ" }, { id: "lab", name: "Lab" }],
      tasks: [{ id: "t1", name: "T1" }],
      assignments: { t1: "lab" },
      bindings: { project: {}, site: {}, task: {}, pair: {} },
    } satisfies ProjectDoc;
    const item = indeterminatePanel(report).find((i) => i.ruleId === 1)!;
    const anchor = missingFactorAnchor(
      item.missing[0], factors, project, { task: item.task, site: item.site });
    expect(anchor).toBe("slot-relationship-hq+lab-time_zone_difference");
  });
});

describe("per-risk rollup", () => {
  it("passes the service grouping through untouched", () => {
    const { report } = fixture<AssessResponse>("report_demo_high.json");
    expect(riskRollup(report)).toEqual(report.risks);
  });
});

describe("retrospective candidates", () => {
  it("lists each reported rule once, in ranking order", () => {
    const { report } = fixture<AssessResponse>("report_demo_high.json");
    const ids = reportedRuleIds(report);
    expect(new Set(ids).size).toBe(ids.length);
    const flattened = report.contexts.flatMap(
      (context) => context.ranked.map((entry) => entry.rule));
    expect(ids).toEqual([...new Set(flattened)]);
  });
});
