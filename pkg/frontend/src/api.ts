// Typed client for the assessment service.  Relevance always comes from
// the server; this module only moves JSON.

import {
  ApiError,
  ApiErrorBody,
  AssessResponse,
  CompareResponse,
  FactorsResponse,
  KbEvent,
  ProjectDoc,
  RulesResponse,
} from "./types.js";

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (!response.ok) {
    let body: ApiErrorBody = { errors: [{ message: response.statusText }] };
    try {
      body = await response.json();
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, body);
  }
  return response.json() as Promise<T>;
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  getFactors(): Promise<FactorsResponse> {
    return request(`${this.baseUrl}/api/factors`);
  }

  getRules(): Promise<RulesResponse> {
    return request(`${this.baseUrl}/api/rules`);
  }

  getKb(): Promise<{ version: number; changelog: unknown[] }> {
    return request(`${this.baseUrl}/api/kb`);
  }

  getProject(id: string): Promise<{ kb_version: number; project: ProjectDoc }> {
    return request(`${this.baseUrl}/api/projects/${id}`);
  }

  putProject(project: ProjectDoc): Promise<{ stored: string }> {
    return request(`${this.baseUrl}/api/projects/${project.id}`, {
      method: "PUT",
      body: JSON.stringify(project),
    });
  }

  /** Store-and-assess; `signal` supports cancel-and-replace on rapid edits. */
  async assess(project: ProjectDoc, threshold: string, mode: string,
               signal?: AbortSignal): Promise<AssessResponse> {
    await this.putProject(project);
    const query = new URLSearchParams({ threshold, mode });
    return request(
      `${this.baseUrl}/api/projects/${project.id}/assess?${query}`,
      { method: "POST", signal });
  }

  compare(projects: (string | ProjectDoc)[], threshold: string,
          mode: string, signal?: AbortSignal): Promise<CompareResponse> {
    return request(`${this.baseUrl}/api/compare`, {
      method: "POST",
      body: JSON.stringify({ projects, threshold, mode }),
      signal,
    });
  }

  postEvent(event: KbEvent): Promise<{ kb_version: number }> {
    return request(`${this.baseUrl}/api/kb/events`, {
      method: "POST",
      body: JSON.stringify(event),
    });
  }
}
