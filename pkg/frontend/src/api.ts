// Typed client for the inspection service. Every JSON route wraps its
// payload in {status, payload|error}; this module unwraps that envelope
// and surfaces failures as ApiError so callers can branch on the code
// (e.g. "conflict" when an answer needs the overwrite flag).

export interface Span {
  line: number;
  column: number;
  end_line: number;
  end_column: number;
}

export interface FactEvidence {
  file?: string;
  span?: Span;
  task_path?: string;
}

export interface Fact {
  name: string;
  args: string[];
  evidence: FactEvidence[];
  extractor: string;
}

export interface SiteEvidence {
  kind: string;
  fact?: Fact;
  note?: string;
  detail?: Record<string, unknown>;
}

export interface Question {
  id: string;
  site: string;
  text: string;
  answer_domain: string[];
}

export interface Site {
  key: string;
  scenario: string;
  mode: string;
  severity: string;
  tendency: string;
  binding: Record<string, string>;
  status: string;
  message: string;
  score: [number, number];
  evidence: SiteEvidence[];
  pending_questions: Question[];
}

export interface Timing {
  targeted_minutes: Record<string, number>;
  mean_other_minutes: number | null;
  targeted_count: number;
  other_count: number;
}

export interface Defect {
  id: string;
  description: string;
  minutes_from_start: number;
  linked_site: string | null;
  targeted: boolean;
}

export interface SessionView {
  id: string;
  started_at: number;
  catalog_version: string;
  inputs: Record<string, { path: string | null; sha256: string }>;
  sites: Site[];
  questions: Question[];
  answers: [string, string][];
  dismissals: string[];
  defects: Defect[];
  timing: Timing;
}

export interface SourcePayload {
  path: string | null;
  text: string;
  anchors: Record<string, Span>;
}

export class ApiError extends Error {
  constructor(public code: string, message: string, public status: number) {
    super(message);
    this.name = 'ApiError';
  }
}

interface Envelope<T> {
  status: 'ok' | 'error';
  payload?: T;
  error?: { code: string; message: string };
}

async function unwrap<T>(response: Response): Promise<T> {
  const body = (await response.json()) as Envelope<T>;
  if (body.status !== 'ok' || body.payload === undefined) {
    const err = body.error ?? { code: 'bad_response', message: 'malformed envelope' };
    throw new ApiError(err.code, err.message, response.status);
  }
  return body.payload;
}

export class InspectorApi {
  constructor(private base: string, public sessionId: string) {}

  private url(suffix: string): string {
    return `${this.base}/sessions/${encodeURIComponent(this.sessionId)}${suffix}`;
  }

  private async getJson<T>(suffix: string): Promise<T> {
    return unwrap<T>(await fetch(this.url(suffix)));
  }

  private async postJson<T>(suffix: string, body: unknown): Promise<T> {
    const response = await fetch(this.url(suffix), {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
    return unwrap<T>(response);
  }

  view(): Promise<SessionView> {
    return this.getJson<SessionView>('');
  }

  sites(): Promise<Site[]> {
    return this.getJson<Site[]>('/sites');
  }

  questions(): Promise<Question[]> {
    return this.getJson<Question[]>('/questions');
  }

  source(): Promise<SourcePayload> {
    return this.getJson<SourcePayload>('/source');
  }

  async reportText(): Promise<string> {
    const response = await fetch(this.url('/report?format=text'));
    if (!response.ok) {
      throw new ApiError('report_failed', await response.text(), response.status);
    }
    return response.text();
  }

  answer(questionId: string, answer: string, overwrite = false) {
    return this.postJson<{ sites: Site[]; questions: Question[] }>('/answers', {
      question_id: questionId,
      answer,
      overwrite,
    });
  }

  dismiss(siteKey: string) {
    return this.postJson<{ sites: Site[] }>('/dismissals', { site: siteKey });
  }

  logDefect(description: string, site?: string) {
    return this.postJson<{ defect: Defect; timing: Timing }>('/defects', {
      description,
      site: site ?? null,
    });
  }
}
